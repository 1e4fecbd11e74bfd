"""Closed-form gradients, Laplacians and bilaplacians on the total space.

Two function classes admit closed forms under the weighted metric: vertical
lifts of base functions and functions of the squared fiber norm.  All
gradients returned here are contravariant raw-coordinate components, i.e.
the metric inverse applied to the coordinate differential, matching the
numerical oracle's convention.

The radial bilaplacian is computed by operator composition: the Laplacian
of a radial function is again radial, so applying the radial Laplacian
twice (with the intermediate profile differentiated analytically) gives the
bilaplacian exactly.  A verbatim transcription of the expanded display
formula is kept alongside purely as a cross-check; see
:func:`bihar_radial_transcription` and :func:`transcription_comparison`.
"""

from __future__ import annotations

import numpy as np

from .errors import CapabilityError
from .fields import BaseFunction, RadialFunction
from .geometry import MetricField, TotalPoint, div_xi_closed_form, radius
from .weights import WeightProfile

__all__ = [
    "lift_bracket",
    "grad_vertical_lift",
    "laplacian_vertical_lift",
    "bilaplacian_vertical_lift",
    "grad_radial",
    "laplacian_radial",
    "bilaplacian_radial",
    "radial_laplacian_profile",
    "bihar_radial_transcription",
    "transcription_comparison",
]


def lift_bracket(w: WeightProfile, m: int, k: int, r: float) -> float:
    """The weight bracket governing biharmonicity of lifts.

    2 r phi1'' - 4 r phi1' (phi1 + phi2)' + 2 m r phi1'^2 + 2 k r phi1' phi2'
    + k phi1'.  Vanishing identically is exactly the condition for vertical
    lifts of biharmonic base functions to stay biharmonic.
    """
    p1p = float(w.phi1[1](r))
    p1pp = float(w.phi1[2](r))
    p2p = float(w.phi2[1](r))
    return (
        2.0 * r * p1pp
        - 4.0 * r * p1p * (p1p + p2p)
        + 2.0 * m * r * p1p**2
        + 2.0 * k * r * p1p * p2p
        + k * p1p
    )


def grad_vertical_lift(space: MetricField, bf: BaseFunction, p: TotalPoint) -> np.ndarray:
    """Gradient of the lifted function: e^{-2 phi1} times the lifted base gradient."""
    if bf.grad_f is None:
        raise CapabilityError(f"{bf.name} carries no gradient closure")
    m = space.m
    r = radius(space.bundle, p)
    g = np.asarray(space.chart.metric(p.x), dtype=float)
    horizontal = float(np.exp(-2.0 * space.weights.phi1[0](r))) * np.linalg.solve(
        g, np.asarray(bf.grad_f(p.x), dtype=float)
    )
    out = np.zeros(space.dim)
    out[:m] = horizontal
    if not space.bundle.is_flat:
        A = np.einsum("ipq,q->pi", np.asarray(space.bundle.conn(p.x), dtype=float), p.u)
        out[m:] = -A @ horizontal
    return out


def laplacian_vertical_lift(space: MetricField, bf: BaseFunction, p: TotalPoint) -> float:
    """e^{-2 phi1(r)} (lap_g f)(x)."""
    r = radius(space.bundle, p)
    return float(np.exp(-2.0 * space.weights.phi1[0](r)) * bf.lap_f(p.x))


def bilaplacian_vertical_lift(space: MetricField, bf: BaseFunction, p: TotalPoint) -> float:
    """e^{-4 phi1} (bilap_g f) - 4 e^{-2(phi1+phi2)} * bracket * (lap_g f)."""
    m, k = space.m, space.k
    w = space.weights
    r = radius(space.bundle, p)
    p1 = float(w.phi1[0](r))
    p2 = float(w.phi2[0](r))
    return float(
        np.exp(-4.0 * p1) * bf.bilap_f(p.x)
        - 4.0 * np.exp(-2.0 * (p1 + p2)) * lift_bracket(w, m, k, r) * bf.lap_f(p.x)
    )


def grad_radial(space: MetricField, rf: RadialFunction, p: TotalPoint) -> np.ndarray:
    """Gradient of alpha(r): 2 e^{-2 phi2} alpha'(r) times the tautological field."""
    m = space.m
    r = radius(space.bundle, p)
    da = float(rf.eval(1, r))
    out = np.zeros(space.dim)
    out[m:] = 2.0 * np.exp(-2.0 * float(space.weights.phi2[0](r))) * da * p.u
    return out


def _first_order_data(rf, w, m, k, r):
    a1 = float(rf.eval(1, r))
    a2 = float(rf.eval(2, r))
    p1p = float(w.phi1[1](r))
    p2p = float(w.phi2[1](r))
    P = m * r * p1p + (k - 2.0) * r * p2p + 0.5 * k
    L = r * a2 + P * a1
    return a1, a2, P, L


def laplacian_radial(rf: RadialFunction, w: WeightProfile, m: int, k: int, r: float) -> float:
    """4 e^{-2 phi2} { r alpha'' + (m r phi1' + (k-2) r phi2' + k/2) alpha' }."""
    _, _, _, L = _first_order_data(rf, w, m, k, r)
    return float(4.0 * np.exp(-2.0 * w.phi2[0](r)) * L)


def bilaplacian_radial(rf: RadialFunction, w: WeightProfile, m: int, k: int, r: float) -> float:
    """Radial Laplacian applied to the radial Laplacian profile.

    Needs alpha to order 4 and the weights to order 3; everything is
    expanded analytically, no numerical differentiation is involved.
    """
    a1, a2, P, L = _first_order_data(rf, w, m, k, r)
    a3 = float(rf.eval(3, r))
    a4 = float(rf.eval(4, r))
    p1p, p1pp, p1ppp = (float(w.phi1[i](r)) for i in (1, 2, 3))
    p2, p2p, p2pp, p2ppp = (float(w.phi2[i](r)) for i in (0, 1, 2, 3))

    Pp = m * p1p + m * r * p1pp + (k - 2.0) * p2p + (k - 2.0) * r * p2pp
    Ppp = 2.0 * m * p1pp + m * r * p1ppp + 2.0 * (k - 2.0) * p2pp + (k - 2.0) * r * p2ppp
    Lp = r * a3 + (P + 1.0) * a2 + Pp * a1
    Lpp = r * a4 + (P + 2.0) * a3 + 2.0 * Pp * a2 + Ppp * a1

    e2 = np.exp(-2.0 * p2)
    beta_p = 4.0 * e2 * (Lp - 2.0 * p2p * L)
    beta_pp = 4.0 * e2 * (Lpp - 4.0 * p2p * Lp + (4.0 * p2p**2 - 2.0 * p2pp) * L)
    return float(4.0 * e2 * (r * beta_pp + P * beta_p))


def radial_laplacian_profile(rf: RadialFunction, w: WeightProfile, m: int, k: int) -> RadialFunction:
    """The radial Laplacian of ``rf`` as a radial profile with two derivatives."""

    def beta(r):
        return 4.0 * np.exp(-2.0 * w.phi2[0](r)) * (
            r * rf.eval(2, r)
            + (m * r * w.phi1[1](r) + (k - 2.0) * r * w.phi2[1](r) + 0.5 * k) * rf.eval(1, r)
        )

    def beta_p(r):
        P = m * r * w.phi1[1](r) + (k - 2.0) * r * w.phi2[1](r) + 0.5 * k
        Pp = (m * w.phi1[1](r) + m * r * w.phi1[2](r)
              + (k - 2.0) * w.phi2[1](r) + (k - 2.0) * r * w.phi2[2](r))
        L = r * rf.eval(2, r) + P * rf.eval(1, r)
        Lp = r * rf.eval(3, r) + (P + 1.0) * rf.eval(2, r) + Pp * rf.eval(1, r)
        return 4.0 * np.exp(-2.0 * w.phi2[0](r)) * (Lp - 2.0 * w.phi2[1](r) * L)

    def beta_pp(r):
        P = m * r * w.phi1[1](r) + (k - 2.0) * r * w.phi2[1](r) + 0.5 * k
        Pp = (m * w.phi1[1](r) + m * r * w.phi1[2](r)
              + (k - 2.0) * w.phi2[1](r) + (k - 2.0) * r * w.phi2[2](r))
        Ppp = (2.0 * m * w.phi1[2](r) + m * r * w.phi1[3](r)
               + 2.0 * (k - 2.0) * w.phi2[2](r) + (k - 2.0) * r * w.phi2[3](r))
        L = r * rf.eval(2, r) + P * rf.eval(1, r)
        Lp = r * rf.eval(3, r) + (P + 1.0) * rf.eval(2, r) + Pp * rf.eval(1, r)
        Lpp = r * rf.eval(4, r) + (P + 2.0) * rf.eval(3, r) + 2.0 * Pp * rf.eval(2, r) + Ppp * rf.eval(1, r)
        p2p = w.phi2[1](r)
        return 4.0 * np.exp(-2.0 * w.phi2[0](r)) * (
            Lpp - 4.0 * p2p * Lp + (4.0 * p2p**2 - 2.0 * w.phi2[2](r)) * L
        )

    return RadialFunction(
        (beta, beta_p, beta_pp),
        singular_at_zero=rf.singular_at_zero,
        domain_min=rf.domain_min,
        name=f"lap({rf.name})",
    )


def bihar_radial_transcription(rf: RadialFunction, w: WeightProfile, m: int, k: int, r: float) -> float:
    """Term-by-term evaluation of the expanded radial-bilaplacian display.

    Kept verbatim, including its quirks: the first block carries a stray
    trailing alpha', the divergence block omits the alpha' factor on its
    middle parenthesis, and the final block repeats the third under an
    e^{-6 phi2} prefactor.  The display does not agree with the composed
    bilaplacian (not even for vanishing weights); use
    :func:`transcription_comparison` to quantify the gap rather than
    asserting equality.
    """
    a1 = float(rf.eval(1, r))
    a2 = float(rf.eval(2, r))
    a3 = float(rf.eval(3, r))
    a4 = float(rf.eval(4, r))
    p1p, p1pp, p1ppp = (float(w.phi1[i](r)) for i in (1, 2, 3))
    p2, p2p, p2pp, p2ppp = (float(w.phi2[i](r)) for i in (0, 1, 2, 3))

    P = m * r * p1p + (k - 2.0) * r * p2p + 0.5 * k
    Q = m * p1p + m * r * p1pp + (k - 2.0) * p2p + r * (k - 2.0) * p2pp
    Pp1 = m * r * p1p + r * (k - 2.0) * p2p + 0.5 * k + 1.0

    term1 = -16.0 * p2p * np.exp(-4.0 * p2) * (r * a2 + P * a1) * a1
    term2 = (
        4.0 * np.exp(-2.0 * p2)
        * (np.exp(-2.0 * p2) * (r * a3 + Q + Pp1 * a2))
        * div_xi_closed_form(w, m, k, r)
    )
    inner = r * a3 + Q * a1 + Pp1 * a2
    term3 = -8.0 * p2p * r * np.exp(-2.0 * p2) * inner
    term4 = 4.0 * r * np.exp(-2.0 * p2) * (
        a3
        + r * a4
        + (2.0 * m * p1pp + m * r * p1ppp + 2.0 * (k - 2.0) * p2pp + r * (k - 2.0) * p2ppp) * a1
        + 2.0 * Q * a2
        + Pp1 * a3
    )
    term5 = -8.0 * r * p2p * np.exp(-6.0 * p2) * inner
    return float(term1 + term2 + term3 + term4 + term5)


def transcription_comparison(rf: RadialFunction, w: WeightProfile, m: int, k: int, grid) -> list:
    """Rows (r, composed, transcribed, difference) over a radius grid."""
    rows = []
    for r in grid:
        r = float(r)
        composed = bilaplacian_radial(rf, w, m, k, r)
        transcribed = bihar_radial_transcription(rf, w, m, k, r)
        rows.append((r, composed, transcribed, transcribed - composed))
    return rows
