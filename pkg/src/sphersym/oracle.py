"""Independent numerical ground truth for metric differential operators.

Everything here works on plain callables and coordinate arrays:

* a *metric* is a callable mapping points of shape ``(..., d)`` to SPD
  matrices of shape ``(..., d, d)``;
* a *scalar field* maps ``(..., d)`` to ``(...,)``;
* a *vector field* maps ``(..., d)`` to ``(..., d)`` (contravariant).

The Laplace-Beltrami operator is evaluated through the coordinate formula

    lap f = G^{IJ} d_I d_J f + (d_I(sqrt|G| G^{IJ}) / sqrt|G|) d_J f,

with all partial derivatives taken by second-order central differences and
Richardson extrapolation over step halvings (error ``O(h^{2L})`` for ``L``
levels).  The ``forward_mode`` scheme replaces differencing with
second-order jets (:mod:`.jets`), which makes first/second derivatives
exact up to rounding; it exists to de-correlate verification errors from
the finite-difference path.

The bilaplacian nests the Laplacian.  The outer pass always uses central
differences, at a step ``nested_step_ratio`` times larger than the inner
one so that inner evaluation noise stays below outer truncation error;
this ratio is the single most sensitive numeric choice in the package.

All functions are pure and reentrant; batched evaluation keeps grid sweeps
cheap without any shared caching.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import jets
from .errors import ConfigurationError, GeometryError

__all__ = [
    "DiffConfig",
    "laplace_beltrami_numeric",
    "bilaplacian_numeric",
    "gradient_numeric",
    "divergence_numeric",
    "directional_derivative",
    "fd_derivative",
    "partial_derivative",
]


@dataclass(frozen=True)
class DiffConfig:
    """Differentiation settings for the numerical oracle.

    ``base_step`` is relative: the step along axis ``I`` at point ``p`` is
    ``base_step * (1 + |p_I|)``.
    """

    scheme: str = "central_fd"
    base_step: float = 1e-3
    richardson_levels: int = 3
    nested_step_ratio: float = 8.0

    def __post_init__(self):
        if self.scheme not in ("central_fd", "forward_mode"):
            raise ConfigurationError(f"unknown differentiation scheme {self.scheme!r}")
        if self.base_step <= 0:
            raise ConfigurationError("base_step must be positive")
        if self.richardson_levels < 1:
            raise ConfigurationError("richardson_levels must be at least 1")
        if self.nested_step_ratio <= 0:
            raise ConfigurationError("nested_step_ratio must be positive")


_DEFAULT = DiffConfig()


def _coords(p):
    if hasattr(p, "as_array"):
        return p.as_array()
    return np.asarray(p, dtype=float)


def _richardson(estimates):
    """Extrapolate a sequence of estimates at steps h, h/2, h/4, ...

    Assumes the leading error is O(h^2) with only even powers, which holds
    for all central-difference stencils used here.
    """
    table = [np.asarray(e, dtype=float) for e in estimates]
    level = 1
    while len(table) > 1:
        factor = 4.0**level
        table = [(factor * table[j + 1] - table[j]) / (factor - 1.0) for j in range(len(table) - 1)]
        level += 1
    return table[0]


def _check_dets(dets):
    if np.any(~np.isfinite(dets)) or np.any(dets <= 0.0):
        raise GeometryError("metric is not positive definite on the difference stencil")


def _lap_batch(metric, field, points, cfg):
    """Central-difference Laplace-Beltrami at a batch of points, shape (N,)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    N, d = P.shape
    eye = np.eye(d)
    pairs = [(i, j) for i in range(d) for j in range(i)]
    H0 = cfg.base_step * (1.0 + np.abs(P))

    estimates = []
    for level in range(cfg.richardson_levels):
        H = H0 / 2.0**level
        plus = P[:, None, :] + H[:, :, None] * eye
        minus = P[:, None, :] - H[:, :, None] * eye

        blocks = [P[:, None, :], plus, minus]
        if pairs:
            cross = np.empty((N, len(pairs), 4, d))
            for c, (i, j) in enumerate(pairs):
                hi = H[:, i : i + 1] * eye[i]
                hj = H[:, j : j + 1] * eye[j]
                cross[:, c, 0] = P + hi + hj
                cross[:, c, 1] = P + hi - hj
                cross[:, c, 2] = P - hi + hj
                cross[:, c, 3] = P - hi - hj
            blocks.append(cross.reshape(N, -1, d))
        fpts = np.concatenate(blocks, axis=1)
        fvals = np.asarray(field(fpts.reshape(-1, d)), dtype=float).reshape(N, -1)
        f0 = fvals[:, 0]
        fp = fvals[:, 1 : 1 + d]
        fm = fvals[:, 1 + d : 1 + 2 * d]

        mpts = np.concatenate([P[:, None, :], plus, minus], axis=1)
        G = np.asarray(metric(mpts.reshape(-1, d)), dtype=float).reshape(N, 1 + 2 * d, d, d)
        dets = np.linalg.det(G)
        _check_dets(dets)
        W = np.sqrt(dets)[..., None, None] * np.linalg.inv(G)

        Ginv0 = np.linalg.inv(G[:, 0])
        sq0 = np.sqrt(dets[:, 0])
        ar = np.arange(d)
        Wp = W[:, 1 : 1 + d]
        Wm = W[:, 1 + d :]
        # D_J = sum_I d_I W^{IJ}
        D = ((Wp[:, ar, ar, :] - Wm[:, ar, ar, :]) / (2.0 * H[..., None])).sum(axis=1)

        grad = (fp - fm) / (2.0 * H)
        hess = np.zeros((N, d, d))
        hess[:, ar, ar] = (fp - 2.0 * f0[:, None] + fm) / H**2
        if pairs:
            fc = fvals[:, 1 + 2 * d :].reshape(N, len(pairs), 4)
            for c, (i, j) in enumerate(pairs):
                mixed = (fc[:, c, 0] - fc[:, c, 1] - fc[:, c, 2] + fc[:, c, 3]) / (4.0 * H[:, i] * H[:, j])
                hess[:, i, j] = mixed
                hess[:, j, i] = mixed
        estimates.append(
            np.einsum("nij,nij->n", Ginv0, hess) + np.einsum("nj,nj->n", D, grad) / sq0
        )
    return _richardson(estimates)


def _lap_forward(metric, field, p):
    """Jet evaluation of the same coordinate formula; no stepping involved."""
    X = jets.seed(p)
    Gj = np.asarray(metric(X), dtype=object)
    fj = field(X)
    if not isinstance(fj, jets.Jet2):
        raise ConfigurationError("field closure is not jet-capable; use scheme='central_fd'")
    d = p.shape[0]
    det = jets.det_generic(Gj)
    if jets.value(det) <= 0.0:
        raise GeometryError("metric is not positive definite at the evaluation point")
    inv = jets.inv_generic(Gj)
    sq = det**0.5
    sq0 = jets.value(sq)

    acc = 0.0
    D = np.zeros(d)
    for i in range(d):
        for j in range(d):
            w = sq * inv[i, j]
            D[j] += w.grad[i]
            acc += jets.value(inv[i, j]) * fj.hess[i, j]
    return acc + float(D @ fj.grad) / sq0


def laplace_beltrami_numeric(metric, field, p, cfg: DiffConfig | None = None) -> float:
    """Laplace-Beltrami operator of ``field`` at ``p`` for the given metric."""
    cfg = cfg or _DEFAULT
    q = _coords(p)
    if cfg.scheme == "forward_mode":
        return _lap_forward(metric, field, q)
    return float(_lap_batch(metric, field, q[None, :], cfg)[0])


def bilaplacian_numeric(metric, field, p, cfg: DiffConfig | None = None) -> float:
    """Iterated Laplace-Beltrami operator, evaluated by nesting.

    The inner Laplacian runs at ``cfg.base_step`` with the configured scheme;
    the outer central-difference pass runs at ``base_step * nested_step_ratio``.
    """
    cfg = cfg or _DEFAULT
    q = _coords(p)
    outer = replace(cfg, base_step=cfg.base_step * cfg.nested_step_ratio, scheme="central_fd")
    if cfg.scheme == "forward_mode":
        def inner(points):
            pts = np.atleast_2d(np.asarray(points, dtype=float))
            return np.array([_lap_forward(metric, field, row) for row in pts])
    else:
        def inner(points):
            return _lap_batch(metric, field, points, cfg)
    return float(_lap_batch(metric, inner, q[None, :], outer)[0])


def gradient_numeric(metric, field, p, cfg: DiffConfig | None = None) -> np.ndarray:
    """Contravariant gradient: the metric inverse applied to the coordinate differential."""
    cfg = cfg or _DEFAULT
    q = _coords(p)
    d = q.shape[0]
    G0 = np.asarray(metric(q), dtype=float)
    try:
        np.linalg.cholesky(G0)
    except np.linalg.LinAlgError:
        raise GeometryError("metric is not positive definite at the evaluation point") from None
    if cfg.scheme == "forward_mode":
        fj = field(jets.seed(q))
        if not isinstance(fj, jets.Jet2):
            raise ConfigurationError("field closure is not jet-capable; use scheme='central_fd'")
        return np.linalg.solve(G0, fj.grad)

    eye = np.eye(d)
    H0 = cfg.base_step * (1.0 + np.abs(q))
    estimates = []
    for level in range(cfg.richardson_levels):
        H = H0 / 2.0**level
        pts = np.concatenate([q + np.diag(H), q - np.diag(H)], axis=0)
        fv = np.asarray(field(pts), dtype=float)
        estimates.append((fv[:d] - fv[d:]) / (2.0 * H))
    return np.linalg.solve(G0, _richardson(estimates))


def divergence_numeric(metric, vector_field, p, cfg: DiffConfig | None = None) -> float:
    """Metric divergence ``|G|^{-1/2} d_I(|G|^{1/2} V^I)`` of a vector field."""
    cfg = cfg or _DEFAULT
    q = _coords(p)
    d = q.shape[0]

    if cfg.scheme == "forward_mode":
        X = jets.seed(q)
        Gj = np.asarray(metric(X), dtype=object)
        Vj = np.asarray(vector_field(X), dtype=object)
        det = jets.det_generic(Gj)
        if jets.value(det) <= 0.0:
            raise GeometryError("metric is not positive definite at the evaluation point")
        sq = det**0.5
        total = 0.0
        for i in range(d):
            s = sq * Vj[i]
            if isinstance(s, jets.Jet2):
                total += s.grad[i]
        return total / jets.value(sq)

    H0 = cfg.base_step * (1.0 + np.abs(q))
    sq0 = None
    estimates = []
    for level in range(cfg.richardson_levels):
        H = H0 / 2.0**level
        pts = np.concatenate([q[None, :], q + np.diag(H), q - np.diag(H)], axis=0)
        G = np.asarray(metric(pts), dtype=float)
        dets = np.linalg.det(G)
        _check_dets(dets)
        V = np.asarray(vector_field(pts), dtype=float)
        S = np.sqrt(dets)[:, None] * V
        if sq0 is None:
            sq0 = np.sqrt(dets[0])
        ar = np.arange(d)
        estimates.append(((S[1 : 1 + d][ar, ar] - S[1 + d :][ar, ar]) / (2.0 * H)).sum())
    return float(_richardson(estimates)) / sq0


def directional_derivative(field, p, v, cfg: DiffConfig | None = None) -> float:
    """Derivative of a scalar field at ``p`` along the coordinate vector ``v``."""
    cfg = cfg or _DEFAULT
    q = _coords(p)
    v = np.asarray(v, dtype=float)
    scale = max(1.0, float(np.max(np.abs(v))))
    h0 = cfg.base_step * (1.0 + float(np.max(np.abs(q)))) / scale
    estimates = []
    for level in range(cfg.richardson_levels):
        h = h0 / 2.0**level
        pts = np.stack([q + h * v, q - h * v])
        fv = np.asarray(field(pts), dtype=float)
        estimates.append((fv[0] - fv[1]) / (2.0 * h))
    return float(_richardson(estimates))


def fd_derivative(fn: Callable[[float], float], x: float,
                  base_step: float = 1e-3, levels: int = 3) -> float:
    """Central-difference derivative of a scalar function of one variable."""
    h0 = base_step * (1.0 + abs(x))
    estimates = []
    for level in range(levels):
        h = h0 / 2.0**level
        estimates.append((fn(x + h) - fn(x - h)) / (2.0 * h))
    return float(_richardson(estimates))


def partial_derivative(fn, p, axis: int, base_step: float = 1e-3, levels: int = 3):
    """Central-difference partial derivative of an array-valued function of a point."""
    q = _coords(p)
    h0 = base_step * (1.0 + abs(q[axis]))
    e = np.zeros_like(q)
    e[axis] = 1.0
    estimates = []
    for level in range(levels):
        h = h0 / 2.0**level
        estimates.append((np.asarray(fn(q + h * e), dtype=float) - np.asarray(fn(q - h * e), dtype=float)) / (2.0 * h))
    return _richardson(estimates)
