"""Radial ODE residuals, exact exponent roots, and solution families.

For the unweighted metric the biharmonicity study reduces to the
fourth-order radial equation

    2 r^2 alpha'''' + (3k+4) r alpha''' + k(k+2) alpha'' = 0,        (ODE)

whose residual :func:`sasaki_radial_residual` evaluates verbatim.  With
psi = alpha'' and the power ansatz psi = beta r^n the equation collapses to
the quadratic

    2 n^2 + (3k+2) n + k(k+2) = 0,

handled in exact rational arithmetic by :func:`exponent_roots`.  It factors
as (n + k)(2n + k + 2), so the roots are n = -k and n = -(k+2)/2: one
double root -2 at k=2, two integer roots for even k, and a single integer
root -k for odd k (the second root is then a half-integer, outside the
integer-power ansatz).  Some derivations report the second root as -k/2;
that value does not satisfy the quadratic for any k except k=2 and is not
used here.

:func:`radial_family` integrates psi twice in closed form; the n = -1 and
n = -2 antiderivatives pick up logarithms, which is exactly how the k=1 and
k=2 families arise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .fields import SINGULAR_DOMAIN_MIN, BaseFunction, RadialFunction, inverse_norm_base
from .operators import (
    bilaplacian_radial,
    bilaplacian_vertical_lift,
    laplacian_radial,
    laplacian_vertical_lift,
    lift_bracket,
)
from .weights import WeightProfile

__all__ = [
    "FamilyParams",
    "ExponentRoots",
    "equation_E_residual",
    "equation_E_prime_residual",
    "sasaki_radial_residual",
    "exponent_roots",
    "euler_quadratic",
    "power_ode_residual",
    "radial_family",
    "classify",
    "classify_vertical_lift",
    "base_example_inverse_norm",
    "HARMONIC",
    "PROPER_BIHARMONIC",
    "NOT_BIHARMONIC",
]

HARMONIC = "harmonic"
PROPER_BIHARMONIC = "proper_biharmonic"
NOT_BIHARMONIC = "not_biharmonic"

FAMILY_CASES = ("k1", "k2", "k_odd", "k_even_a", "k_even_b")


def equation_E_residual(w: WeightProfile, m: int, k: int, r: float) -> float:
    """Residual of the lift-biharmonicity weight condition (form E).

    Also evaluates the algebraically identical regrouped form (E') and
    insists the two agree to 1e-12; a violation can only come from
    non-finite weight values.
    """
    e = lift_bracket(w, m, k, r)
    e_prime = equation_E_prime_residual(w, m, k, r)
    if not abs(e - e_prime) <= 1e-12 * (1.0 + abs(e)):
        raise ArithmeticError(
            f"the two forms of the weight condition disagree: {e} vs {e_prime}"
        )
    return e


def equation_E_prime_residual(w: WeightProfile, m: int, k: int, r: float) -> float:
    """Regrouped form: 2 r phi1'' + 2 r (m-2) phi1'^2 + 2 r (k-2) phi1' phi2' + k phi1'."""
    p1p = float(w.phi1[1](r))
    p1pp = float(w.phi1[2](r))
    p2p = float(w.phi2[1](r))
    return 2.0 * r * p1pp + 2.0 * r * (m - 2.0) * p1p**2 + 2.0 * r * (k - 2.0) * p1p * p2p + k * p1p


def sasaki_radial_residual(rf: RadialFunction, k: int, r: float) -> float:
    """2 r^2 alpha'''' + (3k+4) r alpha''' + k(k+2) alpha''."""
    a2 = float(rf.eval(2, r))
    a3 = float(rf.eval(3, r))
    a4 = float(rf.eval(4, r))
    return 2.0 * r**2 * a4 + (3.0 * k + 4.0) * r * a3 + k * (k + 2.0) * a2


def euler_quadratic(n: Fraction, k: int) -> Fraction:
    """Exact value of 2 n^2 + (3k+2) n + k(k+2), the power-ansatz quadratic."""
    n = Fraction(n)
    return 2 * n * n + (3 * k + 2) * n + k * (k + 2)


def power_ode_residual(n: Fraction, k: int, r: float) -> float:
    """Residual of the second-order reduced equation for psi = r^n at radius r.

    2 r^2 psi'' + (3k+4) r psi' + k(k+2) psi = [2n(n-1) + (3k+4)n + k(k+2)] r^n;
    the bracket equals the power-ansatz quadratic and is computed exactly.
    """
    bracket = euler_quadratic(Fraction(n), k)
    return float(bracket) * float(r) ** float(n)


@dataclass(frozen=True)
class ExponentRoots:
    """Exact roots of the power-ansatz quadratic for a given rank."""

    k: int
    discriminant: Fraction
    roots: tuple
    multiplicities: tuple
    parity_case: str

    @property
    def double(self) -> bool:
        return any(mult == 2 for mult in self.multiplicities)


def exponent_roots(k: int) -> ExponentRoots:
    """Solve 2 n^2 + (3k+2) n + k(k+2) = 0 in exact rational arithmetic.

    The discriminant is the perfect square (k-2)^2, so the roots are the
    rationals -k and -(k+2)/2 (coincident at k=2).
    """
    if k < 1:
        raise ConfigurationError("rank must be a positive integer")
    disc = Fraction((3 * k + 2) ** 2 - 8 * k * (k + 2))
    s = Fraction(abs(k - 2))
    hi = Fraction(-(3 * k + 2) + s, 4)
    lo = Fraction(-(3 * k + 2) - s, 4)
    if k == 1:
        case = "k1"
    elif k == 2:
        case = "k2"
    else:
        case = "odd" if k % 2 else "even"
    if hi == lo:
        roots, mults = (hi,), (2,)
    else:
        roots, mults = (hi, lo), (1, 1)
    for n in roots:
        if euler_quadratic(n, k) != 0:
            raise ArithmeticError(f"root {n} fails the quadratic for k={k}")
    return ExponentRoots(k, disc, roots, mults, case)


@dataclass(frozen=True)
class FamilyParams:
    """Parameters selecting one closed-form family: rank, case, coefficients."""

    k: int
    case: str
    beta: float
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.case not in FAMILY_CASES:
            raise ConfigurationError(f"unknown family case {self.case!r}")
        k = self.k
        valid = (
            (self.case == "k1" and k == 1)
            or (self.case == "k2" and k == 2)
            or (self.case == "k_odd" and k >= 3 and k % 2 == 1)
            or (self.case in ("k_even_a", "k_even_b") and k >= 4 and k % 2 == 0)
        )
        if not valid:
            raise ConfigurationError(f"case {self.case!r} does not match rank k={k}")
        if self.beta == 0.0:
            raise ConfigurationError("beta must be nonzero; the family degenerates to degree one")


def _integrated_power_family(beta: float, n: Fraction, gamma: float, delta: float,
                             name: str) -> RadialFunction:
    """Double antiderivative of psi = beta r^n plus the degree-one kernel.

    n = -1 and n = -2 integrate to logarithmic profiles; every other
    exponent stays a pure power.  All five derivative slots are analytic.
    """
    if n == -1:
        slots = (
            lambda r: beta * (r * np.log(r) - r) + gamma * r + delta,
            lambda r: beta * np.log(r) + gamma,
            lambda r: beta / r,
            lambda r: -beta / r**2,
            lambda r: 2.0 * beta / r**3,
        )
    elif n == -2:
        slots = (
            lambda r: -beta * np.log(r) + gamma * r + delta,
            lambda r: -beta / r + gamma,
            lambda r: beta / r**2,
            lambda r: -2.0 * beta / r**3,
            lambda r: 6.0 * beta / r**4,
        )
    else:
        c = beta / (float(n + 1) * float(n + 2))
        e = float(n) + 2.0

        def slot(order):
            coeff = c
            for j in range(order):
                coeff *= e - j
            if order == 0:
                return lambda r: coeff * r**e + gamma * r + delta
            if order == 1:
                return lambda r: coeff * r ** (e - 1) + gamma
            return lambda r, o=order: coeff * r ** (e - o)

        slots = tuple(slot(o) for o in range(5))
    return RadialFunction(slots, singular_at_zero=True, domain_min=SINGULAR_DOMAIN_MIN, name=name)


def radial_family(fp: FamilyParams) -> RadialFunction:
    """Closed-form solution family of the radial ODE for the given case.

    The second-derivative profile is beta r^n with n = -k for the k1, k2,
    k_odd and k_even_a cases and n = -(k+2)/2 for k_even_b (the second
    exact root; even ranks make it an integer).  All families live on the
    punctured total space: none extends through r = 0.
    """
    k = fp.k
    if fp.case == "k_even_b":
        n = Fraction(-(k + 2), 2)
    else:
        n = Fraction(-k)
    name = f"family_k{k}_{fp.case}"
    return _integrated_power_family(fp.beta, n, fp.gamma, fp.delta, name)


def _classification(lap_values, bilap_values, tol_abs: float) -> str:
    if max(abs(v) for v in lap_values) <= tol_abs:
        return HARMONIC
    if max(abs(v) for v in bilap_values) <= tol_abs:
        return PROPER_BIHARMONIC
    return NOT_BIHARMONIC


def classify(rf: RadialFunction, w: WeightProfile, m: int, k: int,
             grid: Sequence[float]) -> str:
    """Classify the radial field by its Laplacian and bilaplacian on a grid.

    The absolute tolerance scales with the second-derivative magnitude so
    that exact families sit at rounding level while non-solutions score
    O(1) residuals.
    """
    grid = [float(r) for r in grid]
    scale = max(abs(float(rf.eval(2, r))) for r in grid)
    tol_abs = 1e-9 * (1.0 + scale)
    lap = [laplacian_radial(rf, w, m, k, r) for r in grid]
    bilap = [bilaplacian_radial(rf, w, m, k, r) for r in grid]
    return _classification(lap, bilap, tol_abs)


def classify_vertical_lift(space, bf: BaseFunction, points: Sequence) -> str:
    """Classify the lift of a base function at sampled total-space points."""
    lap = [laplacian_vertical_lift(space, bf, p) for p in points]
    bilap = [bilaplacian_vertical_lift(space, bf, p) for p in points]
    scale = max(abs(v) for v in lap + bilap)
    return _classification(lap, bilap, 1e-9 * (1.0 + scale))


def base_example_inverse_norm(n: int) -> BaseFunction:
    """The inverse-norm base function on punctured Euclidean n-space."""
    if n < 2:
        raise ConfigurationError("inverse norm needs base dimension >= 2")
    return inverse_norm_base(n)
