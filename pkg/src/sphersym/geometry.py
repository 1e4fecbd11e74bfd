"""Charts, bundle data, and the weighted metric on the total space.

Adapted coordinates on a rank-k bundle over an m-dimensional chart are
``(x^1..x^m, u^1..u^k)``.  With connection coefficients ``C^p_{iq}(x)`` the
adapted coframe is ``(dx^i, du^p + C^p_{iq} u^q dx^i)`` and the metric is
block diagonal in it:

    G = e^{2 phi1(r)} g(x)  (+)  e^{2 phi2(r)} h,      r = u' h u.

:class:`MetricField` returns the raw-coordinate matrix, obtained from the
block form by the congruence transform with the coframe Jacobian.  The
Levi-Civita cross-check compares finite-difference Christoffel symbols of
that matrix against the closed-form prediction for the flat-connection
case; connection curvature corrections are out of scope, so the check
refuses a nonzero connection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CapabilityError, ConfigurationError, DomainError, GeometryError
from .fields import RRadial, _quad_form
from .oracle import DiffConfig, directional_derivative, partial_derivative
from .weights import WeightProfile

__all__ = [
    "BaseChart",
    "BundleConfig",
    "TotalPoint",
    "MetricField",
    "euclidean_chart",
    "diagonal_chart",
    "radius",
    "tautological_components",
    "xi_field",
    "div_xi_closed_form",
    "adapted_frame",
    "base_christoffel",
    "predicted_christoffel_flat",
    "check_levi_civita_flat",
    "connection_compatibility_defect",
    "der_fun_check",
    "der_xi_check",
]


@dataclass(frozen=True)
class BaseChart:
    """A coordinate box with a smooth metric tensor field.

    ``metric`` maps points ``(..., m)`` to SPD matrices ``(..., m, m)``.
    ``metric_partials``, when supplied, maps a single point to the array
    ``dg[l, i, j] = d_l g_{ij}``; otherwise consumers fall back to central
    differences on ``metric``.
    """

    m: int
    metric: Callable
    domain: np.ndarray
    metric_partials: Optional[Callable] = None
    name: str = "chart"

    def __post_init__(self):
        dom = np.asarray(self.domain, dtype=float)
        if dom.shape != (self.m, 2) or np.any(dom[:, 0] >= dom[:, 1]):
            raise ConfigurationError("domain must be m rows of increasing (lo, hi)")
        object.__setattr__(self, "domain", dom)

    def require_inside(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        if np.any(x < lo) or np.any(x > hi):
            raise DomainError(f"point leaves the chart box of {self.name}")


def euclidean_chart(m: int, halfwidth: float = 4.0, center: float = 0.0) -> BaseChart:
    eye = np.eye(m)

    def metric(x):
        x = np.asarray(x)
        if x.ndim == 1:
            return eye
        return np.broadcast_to(eye, x.shape[:-1] + (m, m))

    domain = np.repeat([[center - halfwidth, center + halfwidth]], m, axis=0)
    return BaseChart(m, metric, domain, lambda x: np.zeros((m, m, m)), name="euclidean")


def diagonal_chart(entries: Sequence[Callable], domain,
                   entry_partials: Optional[Sequence[Sequence[Callable]]] = None,
                   name: str = "diagonal") -> BaseChart:
    """Diagonal base metric g = diag(entries[0](x), ..., entries[m-1](x)).

    ``entry_partials[i][l]`` is d_l entries[i] when analytic partials are
    available.
    """
    m = len(entries)

    def metric(x):
        x = np.asarray(x)
        if x.dtype == object:
            g = np.zeros((m, m), dtype=object)
            for i in range(m):
                g[i, i] = entries[i](x)
            return g
        vals = [np.asarray(e(x), dtype=float) * np.ones(x.shape[:-1]) for e in entries]
        g = np.zeros(x.shape[:-1] + (m, m))
        idx = np.arange(m)
        g[..., idx, idx] = np.stack(vals, axis=-1)
        return g

    partials = None
    if entry_partials is not None:
        def partials(x, _ep=entry_partials):
            dg = np.zeros((m, m, m))
            for i in range(m):
                for l in range(m):
                    dg[l, i, i] = _ep[i][l](x)
            return dg

    return BaseChart(m, metric, domain, partials, name=name)


@dataclass(frozen=True)
class BundleConfig:
    """Rank, constant fiber metric, and optional connection coefficients.

    ``conn`` maps a base point to the array ``C[i, p, q]`` of coefficients;
    ``None`` means the flat trivial connection, the only case the numeric
    cross-checks support.
    """

    k: int
    h: np.ndarray
    conn: Optional[Callable] = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.k, self.k) or not np.allclose(h, h.T):
            raise ConfigurationError("fiber metric must be a symmetric k x k matrix")
        try:
            np.linalg.cholesky(h)
        except np.linalg.LinAlgError:
            raise ConfigurationError("fiber metric must be positive definite") from None
        object.__setattr__(self, "h", h)

    @property
    def is_flat(self) -> bool:
        return self.conn is None


def connection_compatibility_defect(bundle: BundleConfig, xs) -> float:
    """Max violation of metric compatibility h C_i + (h C_i)' = 0 at sample points."""
    if bundle.is_flat:
        return 0.0
    worst = 0.0
    for x in np.atleast_2d(np.asarray(xs, dtype=float)):
        C = np.asarray(bundle.conn(x), dtype=float)
        for i in range(C.shape[0]):
            hc = bundle.h @ C[i]
            worst = max(worst, float(np.max(np.abs(hc + hc.T))))
    return worst


@dataclass(frozen=True)
class TotalPoint:
    """Base and fiber coordinates of a point of the total space."""

    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.array(self.x, dtype=float, ndmin=1))
        object.__setattr__(self, "u", np.array(self.u, dtype=float, ndmin=1))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])

    @classmethod
    def from_array(cls, arr, m: int) -> "TotalPoint":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[:m], arr[m:])


def radius(bundle: BundleConfig, p: TotalPoint) -> float:
    """Squared fiber norm r = h(u, u) of the point."""
    return float(p.u @ bundle.h @ p.u)


def tautological_components(p: TotalPoint) -> np.ndarray:
    """Fiber components of the tautological vertical field at ``p`` (a copy of u)."""
    return p.u.copy()


def xi_field(m: int):
    """The tautological field as a raw-coordinate vector field (0, u)."""

    def xi(X):
        X = np.asarray(X)
        if X.dtype == object:
            V = np.empty_like(X)
            V[..., :m] = 0.0
            V[..., m:] = X[..., m:]
            return V
        V = np.array(X, dtype=float, copy=True)
        V[..., :m] = 0.0
        return V

    return xi


def div_xi_closed_form(w: WeightProfile, m: int, k: int, r: float) -> float:
    """Divergence of the tautological field: 2 m r phi1' + (1 + 2 r phi2') k."""
    return 2.0 * m * r * float(w.phi1[1](r)) + (1.0 + 2.0 * r * float(w.phi2[1](r))) * k


@dataclass(frozen=True)
class MetricField:
    """The weighted metric on the total space, as a callable on raw coordinates."""

    chart: BaseChart
    bundle: BundleConfig
    weights: WeightProfile

    @property
    def m(self) -> int:
        return self.chart.m

    @property
    def k(self) -> int:
        return self.bundle.k

    @property
    def dim(self) -> int:
        return self.chart.m + self.bundle.k

    def point_radius(self, xu) -> float:
        u = np.asarray(xu, dtype=float)[self.m :]
        return float(u @ self.bundle.h @ u)

    def __call__(self, X):
        """Metric matrices at coordinates of shape ``(..., m+k)``.

        Float input is evaluated batched; object input (jets) goes through a
        scalar assembly path restricted to single points and flat
        connections.
        """
        X = np.asarray(X)
        if X.dtype == object:
            return self._assemble_generic(X)
        single = X.ndim == 1
        P = np.atleast_2d(X.astype(float))
        m, k = self.m, self.k
        d = m + k
        x, u = P[:, :m], P[:, m:]
        self.chart.require_inside(x)
        r = np.einsum("np,pq,nq->n", u, self.bundle.h, u)
        e1 = np.exp(2.0 * np.asarray(self.weights.phi1[0](r), dtype=float) * np.ones_like(r))
        e2 = np.exp(2.0 * np.asarray(self.weights.phi2[0](r), dtype=float) * np.ones_like(r))
        g = np.asarray(self.chart.metric(x), dtype=float)
        D = np.zeros((P.shape[0], d, d))
        D[:, :m, :m] = e1[:, None, None] * g
        D[:, m:, m:] = e2[:, None, None] * self.bundle.h
        if self.bundle.is_flat:
            G = D
        else:
            A = np.stack(
                [np.einsum("ipq,q->pi", np.asarray(self.bundle.conn(xi), dtype=float), ui)
                 for xi, ui in zip(x, u)]
            )
            J = np.zeros((P.shape[0], d, d))
            J[:, :m, :m] = np.eye(m)
            J[:, m:, m:] = np.eye(k)
            J[:, m:, :m] = A
            G = np.einsum("nsi,nst,ntj->nij", J, D, J)
        return G[0] if single else G

    def _assemble_generic(self, X):
        if not self.bundle.is_flat:
            raise CapabilityError("jet evaluation supports flat connections only")
        m, k = self.m, self.k
        d = m + k
        x, u = X[:m], X[m:]
        r = _quad_form(self.bundle.h, u)
        e1 = np.exp(2.0 * self.weights.phi1[0](r))
        e2 = np.exp(2.0 * self.weights.phi2[0](r))
        g = np.asarray(self.chart.metric(x))
        G = np.zeros((d, d), dtype=object)
        for i in range(m):
            for j in range(m):
                G[i, j] = e1 * g[i, j]
        for p in range(k):
            for q in range(k):
                G[m + p, m + q] = e2 * self.bundle.h[p, q]
        return G

    def matrix(self, p: TotalPoint) -> np.ndarray:
        """Raw-coordinate metric matrix at ``p``, verified SPD."""
        G = self(p.as_array())
        try:
            np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise GeometryError("assembled metric is not positive definite") from None
        return G

    def matrix_at(self, xu) -> np.ndarray:
        return self(np.asarray(xu, dtype=float))


def adapted_frame(field: MetricField, p: TotalPoint) -> np.ndarray:
    """Columns of a G-orthonormal frame adapted to the splitting.

    The first m columns are rescaled horizontal lifts of a g-orthonormal
    base frame, the last k columns rescaled vertical lifts of an
    h-orthonormal fiber frame.
    """
    m, k = field.m, field.k
    d = m + k
    r = radius(field.bundle, p)
    g = np.asarray(field.chart.metric(p.x), dtype=float)
    bframe = np.linalg.inv(np.linalg.cholesky(g)).T
    cframe = np.linalg.inv(np.linalg.cholesky(field.bundle.h)).T
    s1 = float(np.exp(field.weights.phi1[0](r)))
    s2 = float(np.exp(field.weights.phi2[0](r)))
    E = np.zeros((d, d))
    E[:m, :m] = bframe / s1
    E[m:, m:] = cframe / s2
    if not field.bundle.is_flat:
        A = np.einsum("ipq,q->pi", np.asarray(field.bundle.conn(p.x), dtype=float), p.u)
        E[m:, :m] = -A @ bframe / s1
    return E


def base_christoffel(chart: BaseChart, x, base_step: float = 1e-3, levels: int = 3) -> np.ndarray:
    """Christoffel symbols of the base metric, analytic partials preferred."""
    x = np.asarray(x, dtype=float)
    m = chart.m
    g = np.asarray(chart.metric(x), dtype=float)
    ginv = np.linalg.inv(g)
    if chart.metric_partials is not None:
        dg = np.asarray(chart.metric_partials(x), dtype=float)
    else:
        dg = np.stack([partial_derivative(chart.metric, x, l, base_step, levels) for l in range(m)])
    sym = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    return 0.5 * np.einsum("st,ijt->sij", ginv, sym)


def predicted_christoffel_flat(field: MetricField, p: TotalPoint) -> np.ndarray:
    """Closed-form Christoffel symbols of G for a flat connection.

    The full-space connection splits into the lifted base/fiber connection
    plus a correction tensor with coefficients

        a = 2 phi1',  b = 2 phi2',
        c1 = -2 phi1' e^{2(phi1 - phi2)},  c2 = -2 phi2',

    applied to the tautological field; expressed here directly in raw
    coordinates.
    """
    if not field.bundle.is_flat:
        raise CapabilityError("closed-form symbols are implemented for flat connections only")
    m, k = field.m, field.k
    d = m + k
    r = radius(field.bundle, p)
    w = field.weights
    p1, dp1 = float(w.phi1[0](r)), float(w.phi1[1](r))
    p2, dp2 = float(w.phi2[0](r)), float(w.phi2[1](r))
    a = 2.0 * dp1
    b = 2.0 * dp2
    c1 = -2.0 * dp1 * np.exp(2.0 * (p1 - p2))
    c2 = -2.0 * dp2
    g = np.asarray(field.chart.metric(p.x), dtype=float)
    hu = field.bundle.h @ p.u

    Gam = np.zeros((d, d, d))
    Gam[:m, :m, :m] = base_christoffel(field.chart, p.x)
    Gam[m:, :m, :m] = c1 * np.einsum("p,ij->pij", p.u, g)
    for i in range(m):
        for q in range(k):
            Gam[i, i, m + q] += a * hu[q]
            Gam[i, m + q, i] += a * hu[q]
    for s in range(k):
        for pp in range(k):
            for q in range(k):
                val = c2 * field.bundle.h[pp, q] * p.u[s]
                if s == q:
                    val += b * hu[pp]
                if s == pp:
                    val += b * hu[q]
                Gam[m + s, m + pp, m + q] = val
    return Gam


def check_levi_civita_flat(field: MetricField, p: TotalPoint,
                           base_step: float = 1e-3, levels: int = 3) -> float:
    """Max deviation between numeric and predicted Christoffel symbols of G.

    Numeric symbols come from central differences of the assembled metric;
    the prediction is :func:`predicted_christoffel_flat`.  Nonzero
    connections are refused because their curvature corrections are not
    modeled.
    """
    if not field.bundle.is_flat:
        raise CapabilityError("the Levi-Civita check supports flat connections only")
    arr = p.as_array()
    d = field.dim
    G0 = field.matrix(p)
    dG = np.stack([partial_derivative(field, arr, L, base_step, levels) for L in range(d)])
    sym = dG + dG.transpose(1, 0, 2) - dG.transpose(1, 2, 0)
    numeric = 0.5 * np.einsum("kt,ijt->kij", np.linalg.inv(G0), sym)
    return float(np.max(np.abs(numeric - predicted_christoffel_flat(field, p))))


def der_fun_check(field: MetricField, radial: RRadial, p: TotalPoint,
                  cfg: DiffConfig | None = None) -> tuple[float, float]:
    """Directional-derivative checks for functions of r.

    Returns ``(horizontal, vertical)`` where ``horizontal`` is the largest
    FD derivative of the radial field along the adapted horizontal frame
    vectors (exactly zero in theory) and ``vertical`` the largest deviation
    of the fiber coordinate derivatives from ``2 alpha'(r) (h u)_p``.
    """
    arr = p.as_array()
    m, k = field.m, field.k
    E = adapted_frame(field, p)
    horizontal = 0.0
    for i in range(m):
        horizontal = max(horizontal, abs(directional_derivative(radial, arr, E[:, i], cfg)))
    r = radius(field.bundle, p)
    hu = field.bundle.h @ p.u
    da = float(radial.rf.eval(1, r))
    vertical = 0.0
    for q in range(k):
        e = np.zeros(m + k)
        e[m + q] = 1.0
        fd = directional_derivative(radial, arr, e, cfg)
        vertical = max(vertical, abs(fd - 2.0 * da * hu[q]))
    return horizontal, vertical


def der_xi_check(field: MetricField, p: TotalPoint,
                 base_step: float = 1e-3, levels: int = 3) -> float:
    """Deviation of the FD Jacobian of the tautological field from its exact
    block structure (zero on base directions, identity on fiber directions)."""
    m, k = field.m, field.k
    d = m + k
    xi = xi_field(m)
    arr = p.as_array()
    jac = np.stack([partial_derivative(xi, arr, L, base_step, levels) for L in range(d)], axis=1)
    expected = np.zeros((d, d))
    expected[m:, m:] = np.eye(k)
    return float(np.max(np.abs(jac - expected)))
