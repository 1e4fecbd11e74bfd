"""Function classes on the total space and on the base.

Three kinds of scalar fields are supported on a rank-k bundle over an
m-dimensional chart, all callable on coordinate arrays ``(..., m+k)``:

* :class:`VerticalLift` -- a base function composed with the projection;
* :class:`RRadial` -- a function of the squared fiber norm only;
* :class:`RawCoordinate` -- an arbitrary coordinate expression.

:class:`RadialFunction` and :class:`BaseFunction` carry the analytic
derivative data the closed-form operators consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp

from .errors import CapabilityError, DomainError

__all__ = [
    "RadialFunction",
    "BaseFunction",
    "VerticalLift",
    "RRadial",
    "RawCoordinate",
    "radial_polynomial",
    "inverse_norm_base",
    "poly_base",
    "gaussian_base",
    "coordinate_base",
    "saddle_base",
    "norm_sq_base",
]

SINGULAR_DOMAIN_MIN = 1e-3


@dataclass(frozen=True)
class RadialFunction:
    """A profile alpha(r) with analytic derivatives.

    ``derivs`` holds callables for orders 0..n (n = 4 for the families this
    package constructs, 2 is enough for one Laplacian pass).  Profiles that
    blow up at r=0 carry ``singular_at_zero`` and a positive ``domain_min``;
    evaluation below it is a :class:`DomainError`.
    """

    derivs: tuple
    singular_at_zero: bool = False
    domain_min: float = 0.0
    name: str = "alpha"

    def eval(self, order: int, r):
        if not 0 <= order < len(self.derivs):
            raise CapabilityError(
                f"{self.name} carries derivatives up to order {len(self.derivs) - 1}, got {order}"
            )
        if np.any(np.asarray(r) < self.domain_min):
            raise DomainError(
                f"{self.name} is only defined for r >= {self.domain_min}"
            )
        return self.derivs[order](r)

    def __call__(self, r):
        return self.eval(0, r)


def radial_polynomial(coeffs: Sequence[float], name: str = "alpha") -> RadialFunction:
    c = np.asarray(list(coeffs) or [0.0], dtype=float)
    slots = []
    for _ in range(5):
        cc = c.copy()
        slots.append(lambda r, cc=cc: npp.polyval(r, cc))
        c = npp.polyder(c) if c.size > 1 else np.array([0.0])
    return RadialFunction(tuple(slots), name=name)


@dataclass(frozen=True)
class BaseFunction:
    """A base-chart function with its Laplacian data.

    ``lap_f`` and ``bilap_f`` may be analytic closures or wrappers around a
    base-chart oracle; the closed-form lift operators only ever evaluate
    them pointwise.  ``grad_f`` is optional and only needed for gradients.
    """

    f: Callable
    lap_f: Callable
    bilap_f: Callable
    grad_f: Optional[Callable] = None
    name: str = "f"


def _quad_form(h: np.ndarray, u):
    if getattr(u, "dtype", None) == object:
        k = u.shape[-1]
        total = 0.0
        for p in range(k):
            for q in range(k):
                if h[p, q] != 0.0:
                    total = total + u[..., p] * (h[p, q] * u[..., q])
        return total
    return np.einsum("...p,pq,...q->...", u, h, u)


@dataclass(frozen=True)
class VerticalLift:
    """Base function pulled back through the projection; constant on fibers."""

    bf: BaseFunction
    m: int
    kind: str = field(default="vertical_lift", init=False)

    def __call__(self, xu):
        xu = np.asarray(xu)
        return self.bf.f(xu[..., : self.m])


@dataclass(frozen=True)
class RRadial:
    """Function of the squared fiber norm r = h(u, u) only."""

    rf: RadialFunction
    h: np.ndarray
    m: int
    kind: str = field(default="r_radial", init=False)

    def radius(self, xu):
        xu = np.asarray(xu)
        return _quad_form(self.h, xu[..., self.m :])

    def __call__(self, xu):
        return self.rf.eval(0, self.radius(xu))


@dataclass(frozen=True)
class RawCoordinate:
    """Arbitrary coordinate expression; the caller owns its derivative story."""

    fn: Callable
    kind: str = field(default="raw", init=False)

    def __call__(self, xu):
        return self.fn(np.asarray(xu))


# Built-in base functions on Euclidean charts. Laplacians are with respect
# to the flat base metric; all closures are vectorized and jet-safe.


def inverse_norm_base(n: int) -> BaseFunction:
    """f = |x|^{-1} on the punctured Euclidean n-space.

    lap f = (3-n)|x|^{-3} and bilap f = 3(n-5)(n-3)|x|^{-5}, so the lift of
    f is harmonic for n=3 and biharmonic-but-not-harmonic for n=5.
    """
    if n < 2:
        raise DomainError("inverse norm needs base dimension >= 2")

    def sq(x):
        if getattr(x, "dtype", None) == object:
            total = x[..., 0] * x[..., 0]
            for i in range(1, n):
                total = total + x[..., i] * x[..., i]
            return total
        return np.einsum("...i,...i->...", x, x)

    return BaseFunction(
        f=lambda x: sq(x) ** -0.5,
        lap_f=lambda x: float(3 - n) * sq(x) ** -1.5,
        bilap_f=lambda x: float(3 * (n - 5) * (n - 3)) * sq(x) ** -2.5,
        grad_f=lambda x: -np.asarray(x) * (sq(x) ** -1.5)[..., None],
        name=f"inverse_norm_{n}d",
    )


def poly_base(m: int, quartic: float = 0.0, quad: Optional[np.ndarray] = None,
              lin: Optional[np.ndarray] = None, const: float = 0.0,
              name: str = "poly") -> BaseFunction:
    """f = quartic*|x|^4 + x'Qx + b'x + c with exact flat Laplacians."""
    Q = np.zeros((m, m)) if quad is None else 0.5 * (np.asarray(quad, float) + np.asarray(quad, float).T)
    b = np.zeros(m) if lin is None else np.asarray(lin, dtype=float)

    def sq(x):
        if getattr(x, "dtype", None) == object:
            total = x[..., 0] * x[..., 0]
            for i in range(1, m):
                total = total + x[..., i] * x[..., i]
            return total
        return np.einsum("...i,...i->...", x, x)

    def f(x):
        s = sq(x)
        quad_part = _quad_form(Q, x)
        lin_part = 0.0
        for i in range(m):
            if b[i] != 0.0:
                lin_part = lin_part + b[i] * x[..., i]
        return quartic * s * s + quad_part + lin_part + const

    trQ = float(np.trace(Q))
    return BaseFunction(
        f=f,
        lap_f=lambda x: 4.0 * quartic * (m + 2) * sq(x) + 2.0 * trQ,
        bilap_f=lambda x: 8.0 * quartic * m * (m + 2) + 0.0 * sq(x),
        grad_f=lambda x: 4.0 * quartic * sq(x)[..., None] * np.asarray(x)
        + 2.0 * np.asarray(x) @ Q + b,
        name=name,
    )


def gaussian_base(m: int, amp: float = 1.0) -> BaseFunction:
    """f = amp * exp(-|x|^2), a non-polynomial smooth test function."""

    def sq(x):
        if getattr(x, "dtype", None) == object:
            total = x[..., 0] * x[..., 0]
            for i in range(1, m):
                total = total + x[..., i] * x[..., i]
            return total
        return np.einsum("...i,...i->...", x, x)

    def f(x):
        return amp * np.exp(-sq(x))

    def lap(x):
        s = sq(x)
        return amp * (4.0 * s - 2.0 * m) * np.exp(-s)

    def bilap(x):
        s = sq(x)
        return amp * (16.0 * s * s - (16.0 * m + 32.0) * s + 4.0 * m * m + 8.0 * m) * np.exp(-s)

    return BaseFunction(
        f=f,
        lap_f=lap,
        bilap_f=bilap,
        grad_f=lambda x: -2.0 * np.asarray(x) * f(x)[..., None],
        name="gaussian",
    )


def coordinate_base(m: int, axis: int = 0) -> BaseFunction:
    """The coordinate function x_axis; harmonic for any flat base."""
    b = np.zeros(m)
    b[axis] = 1.0
    return poly_base(m, lin=b, name=f"x{axis + 1}")


def saddle_base() -> BaseFunction:
    """x^2 - y^2 on the plane, the standard harmonic quadratic."""
    return poly_base(2, quad=np.diag([1.0, -1.0]), name="saddle")


def norm_sq_base(m: int) -> BaseFunction:
    """|x|^2 with flat Laplacian 2m."""
    return poly_base(m, quad=np.eye(m), name="norm_sq")
