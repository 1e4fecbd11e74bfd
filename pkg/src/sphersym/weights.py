"""Weight function pairs for radially weighted bundle metrics.

A :class:`WeightProfile` holds the two scalar weights ``phi1`` and ``phi2``
(functions of the squared fiber norm ``r``) together with their first three
derivatives.  Derivatives are supplied analytically by the constructor, not
produced by internal differentiation: the closed-form operators downstream
need them exact, and finite differences are kept purely as a consistency
check (:func:`check_regularity`).

Closures must be numpy-vectorized over ``r`` and should stick to arithmetic
plus method-dispatching ufuncs so they also evaluate on jets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp

from .errors import CapabilityError, ConfigurationError
from .oracle import fd_derivative

__all__ = [
    "WeightProfile",
    "RegularityEntry",
    "RegularityReport",
    "polynomial_weight",
    "log_weight",
    "zero_weight",
    "preset",
    "eval_weight",
    "check_regularity",
]

DerivTuple = tuple  # four callables: orders 0..3


@dataclass(frozen=True)
class WeightProfile:
    """The pair (phi1, phi2) with derivatives of order 0..3 each."""

    name: str
    phi1: DerivTuple
    phi2: DerivTuple

    def __post_init__(self):
        for label, slots in (("phi1", self.phi1), ("phi2", self.phi2)):
            if len(slots) != 4 or not all(callable(f) for f in slots):
                raise ConfigurationError(f"{label} needs callables for orders 0..3")

    def slots(self, which: str) -> DerivTuple:
        if which == "phi1":
            return self.phi1
        if which == "phi2":
            return self.phi2
        raise ConfigurationError(f"unknown weight {which!r} (expected 'phi1' or 'phi2')")


def polynomial_weight(coeffs: Sequence[float]) -> DerivTuple:
    """Derivative slots of a polynomial in ``r`` with ascending coefficients."""
    c = np.asarray(list(coeffs) or [0.0], dtype=float)
    slots = []
    for _ in range(4):
        cc = c.copy()
        slots.append(lambda r, cc=cc: npp.polyval(r, cc))
        c = npp.polyder(c) if c.size > 1 else np.array([0.0])
    return tuple(slots)


def zero_weight() -> DerivTuple:
    return polynomial_weight([0.0])


def log_weight(c: float) -> DerivTuple:
    """``c*log(r)``; singular at r=0, used for the scale-invariant weight family."""
    return (
        lambda r: c * np.log(r),
        lambda r: c / r,
        lambda r: -c / r**2,
        lambda r: 2.0 * c / r**3,
    )


def _as_slots(spec) -> DerivTuple:
    if isinstance(spec, tuple) and len(spec) == 4:
        return spec
    return polynomial_weight(spec)


def preset(name: str, phi2=None) -> WeightProfile:
    """Built-in profiles.

    ``sasaki``
        phi1 = phi2 = 0, the unweighted product metric.
    ``vertical_conformal``
        phi1 = 0 and ``phi2`` as supplied (polynomial coefficients or a
        4-tuple of callables); rescales fibers only.
    ``linear_horizontal``
        phi1(r) = r, phi2 = 0; deliberately not a solution of the lift
        biharmonicity condition, useful as a negative control.
    """
    if name == "sasaki":
        return WeightProfile("sasaki", zero_weight(), zero_weight())
    if name == "vertical_conformal":
        if phi2 is None:
            raise ConfigurationError("vertical_conformal needs a phi2 specification")
        return WeightProfile("vertical_conformal", zero_weight(), _as_slots(phi2))
    if name == "linear_horizontal":
        return WeightProfile("linear_horizontal", polynomial_weight([0.0, 1.0]), zero_weight())
    raise ConfigurationError(f"unknown weight preset {name!r}")


def eval_weight(profile: WeightProfile, which: str, order: int, r: float) -> float:
    """Value of the requested weight derivative at ``r >= 0``."""
    if not 0 <= order <= 3:
        raise CapabilityError(f"weight derivatives are carried up to order 3, got {order}")
    return float(profile.slots(which)[order](r))


@dataclass(frozen=True)
class RegularityEntry:
    weight: str
    order: int
    max_rel_mismatch: float
    right_limit: float
    limit_converged: bool

    @property
    def ok(self) -> bool:
        return self.limit_converged and self.max_rel_mismatch <= 1e-6


@dataclass(frozen=True)
class RegularityReport:
    profile: str
    entries: tuple

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)


def _right_limit(fn, h0: float = 1e-2):
    """Extrapolate fn(r) for r -> 0+ from r = h, h/2, h/4.

    Quadratic polynomial extrapolation to r = 0 (exact for smooth one-sided
    extensions through second order).  Divergent profiles (log r, negative
    powers) show up as successive differences that fail to shrink
    geometrically and are flagged instead of extrapolated.
    """
    v = [float(fn(h0 / 2.0**j)) for j in range(3)]
    if not all(np.isfinite(v)):
        return float("nan"), False
    limit = v[0] / 3.0 - 2.0 * v[1] + 8.0 * v[2] / 3.0
    d1 = v[1] - v[0]
    d2 = v[2] - v[1]
    converged = abs(d2) <= 0.75 * abs(d1) + 1e-9 * (1.0 + abs(limit))
    return limit, converged


def check_regularity(profile: WeightProfile, grid: Sequence[float]) -> RegularityReport:
    """Report FD-vs-analytic mismatches and right-limits at r=0 for both weights.

    Mismatches compare each supplied derivative of order d against a central
    difference of order d-1 at every strictly positive grid point; the step
    is the oracle's Richardson differentiator default.  Failures are carried
    in the report, never raised.
    """
    rs = [float(r) for r in grid]
    if not rs or any(r < 0 for r in rs):
        raise ConfigurationError("grid must be nonempty with nonnegative radii")
    entries = []
    for which in ("phi1", "phi2"):
        slots = profile.slots(which)
        for order in range(4):
            if order == 0:
                mismatch = 0.0
            else:
                mismatch = 0.0
                for r in rs:
                    if r <= 0:
                        continue
                    step = min(1e-3 * (1.0 + r), 0.25 * r)
                    fd = fd_derivative(slots[order - 1], r, base_step=step / (1.0 + r))
                    exact = float(slots[order](r))
                    mismatch = max(mismatch, abs(fd - exact) / (1.0 + abs(exact)))
            limit, converged = _right_limit(slots[order])
            entries.append(RegularityEntry(which, order, mismatch, limit, converged))
    return RegularityReport(profile.name, tuple(entries))
