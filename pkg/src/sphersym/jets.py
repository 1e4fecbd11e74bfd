"""Second-order forward-mode jets.

A :class:`Jet2` carries a value, a gradient and a dense Hessian with respect
to a fixed tuple of seed variables and propagates them exactly through
arithmetic.  The numerical oracle uses jets as its ``forward_mode`` scheme,
an error source independent of finite differencing: first and second
derivatives obtained this way are exact up to rounding.

Closures evaluated on jets must stick to plain arithmetic plus numpy ufuncs
that dispatch to methods (``np.exp``, ``np.log``, ``np.sqrt`` all do).
``numpy.linalg`` does not accept object arrays; use :func:`det_generic` and
:func:`inv_generic` instead.
"""

from __future__ import annotations

import math

import numpy as np


class Jet2:
    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, value, dim):
        return cls(value, np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def variable(cls, value, index, dim):
        g = np.zeros(dim)
        g[index] = 1.0
        return cls(value, g, np.zeros((dim, dim)))

    @property
    def dim(self):
        return self.grad.shape[0]

    def _lift(self, other):
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(float(other), self.dim)

    # arithmetic

    def __add__(self, other):
        o = self._lift(other)
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        outer = np.outer(self.grad, o.grad)
        return Jet2(
            self.value * o.value,
            self.value * o.grad + o.value * self.grad,
            self.value * o.hess + o.value * self.hess + outer + outer.T,
        )

    __rmul__ = __mul__

    def _reciprocal(self):
        v = self.value
        outer = np.outer(self.grad, self.grad)
        return Jet2(1.0 / v, -self.grad / v**2, -self.hess / v**2 + 2.0 * outer / v**3)

    def __truediv__(self, other):
        return self * self._lift(other)._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)):
            n = int(exponent)
            if n == 0:
                return Jet2.constant(1.0, self.dim)
            if n < 0:
                return self._reciprocal() ** (-n)
            out = self
            for _ in range(n - 1):
                out = out * self
            return out
        # real exponent: defined for positive values only
        return (self.log() * float(exponent)).exp()

    # ufunc-dispatched transcendentals

    def exp(self):
        e = math.exp(self.value)
        outer = np.outer(self.grad, self.grad)
        return Jet2(e, e * self.grad, e * (self.hess + outer))

    def log(self):
        v = self.value
        outer = np.outer(self.grad, self.grad)
        return Jet2(math.log(v), self.grad / v, self.hess / v - outer / v**2)

    def sqrt(self):
        return self ** 0.5

    # ordering compares value parts; needed for pivot selection and domain checks

    def __lt__(self, other):
        return self.value < (other.value if isinstance(other, Jet2) else other)

    def __le__(self, other):
        return self.value <= (other.value if isinstance(other, Jet2) else other)

    def __gt__(self, other):
        return self.value > (other.value if isinstance(other, Jet2) else other)

    def __ge__(self, other):
        return self.value >= (other.value if isinstance(other, Jet2) else other)

    def __repr__(self):
        return f"Jet2({self.value!r}, grad={self.grad!r})"


def seed(point):
    """Object array of jet variables seeded on the coordinates of ``point``."""
    p = np.asarray(point, dtype=float)
    d = p.shape[0]
    out = np.empty(d, dtype=object)
    for i in range(d):
        out[i] = Jet2.variable(p[i], i, d)
    return out


def value(x):
    return x.value if isinstance(x, Jet2) else float(x)


def det_generic(matrix):
    """Determinant by Gaussian elimination with partial pivoting.

    Works on object arrays of jets (or any field with arithmetic and a
    value-based ordering); intended for the small matrices this package
    handles.
    """
    a = np.array(matrix, dtype=object)
    n = a.shape[0]
    det = 1.0
    for col in range(n):
        pivot = max(range(col, n), key=lambda i: abs(value(a[i, col])))
        if abs(value(a[pivot, col])) == 0.0:
            return 0.0 * a[0, 0]
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            det = det * -1.0
        det = det * a[col, col]
        for i in range(col + 1, n):
            factor = a[i, col] / a[col, col]
            for j in range(col + 1, n):
                a[i, j] = a[i, j] - factor * a[col, j]
            a[i, col] = 0.0
    return det


def inv_generic(matrix):
    """Inverse by Gauss-Jordan elimination with partial pivoting (object arrays)."""
    a = np.array(matrix, dtype=object)
    n = a.shape[0]
    aug = np.empty((n, 2 * n), dtype=object)
    aug[:, :n] = a
    aug[:, n:] = 0.0
    for i in range(n):
        aug[i, n + i] = 1.0
    for col in range(n):
        pivot = max(range(col, n), key=lambda i: abs(value(aug[i, col])))
        if abs(value(aug[pivot, col])) == 0.0:
            raise ZeroDivisionError("singular matrix")
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        piv = aug[col, col]
        for j in range(2 * n):
            aug[col, j] = aug[col, j] / piv
        for i in range(n):
            if i == col:
                continue
            factor = aug[i, col]
            if isinstance(factor, float) and factor == 0.0:
                continue
            for j in range(2 * n):
                aug[i, j] = aug[i, j] - factor * aug[col, j]
    return aug[:, n:]
