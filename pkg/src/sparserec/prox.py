"""Proximal operators and Euclidean projections onto ``l_p`` balls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import InvalidParameterError, lp_norm

__all__ = [
    "P_MAX",
    "BallSpec",
    "dual_exponent",
    "soft_threshold",
    "project_ball",
    "project_lp_ball",
    "project_columns",
]

# Largest finite exponent supported by the general projection.
P_MAX = 128.0


def _check_p(p) -> float:
    p = float(p)
    if not (p >= 1.0 and (p <= P_MAX or math.isinf(p))):
        raise InvalidParameterError(f"p must lie in [1, {P_MAX:g}] or be inf, got {p}")
    return p


def dual_exponent(p: float) -> float:
    """Hoelder conjugate ``p*`` with ``1/p + 1/p* = 1``."""
    p = float(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class BallSpec:
    """The set ``{u : ||u - center||_p <= radius}``; ``center=None`` means the origin."""

    p: float
    radius: float
    center: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        _check_p(self.p)
        if not self.radius >= 0.0:
            raise InvalidParameterError(f"radius must be >= 0, got {self.radius}")
        if self.center is not None and not np.all(np.isfinite(self.center)):
            raise InvalidParameterError("ball center has non-finite entries")


def soft_threshold(x, lam: float) -> np.ndarray:
    """Entrywise ``sign(x) * max(|x| - lam, 0)``, the prox of ``lam * ||.||_1``."""
    if lam < 0:
        raise InvalidParameterError(f"threshold must be >= 0, got {lam}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def _project_l1(d: np.ndarray, radius: float) -> np.ndarray:
    if np.abs(d).sum() <= radius:
        return d.copy()
    if radius == 0.0:
        return np.zeros_like(d)
    u = np.sort(np.abs(d))[::-1]
    css = np.cumsum(u) - radius
    k = np.arange(1, u.size + 1)
    rho = np.nonzero(u * k > css)[0][-1]
    # rounding can push theta just below 0 when ||d||_1 barely exceeds radius
    theta = max(css[rho] / (rho + 1.0), 0.0)
    return soft_threshold(d, theta)


def _inner_magnitudes(t: np.ndarray, log_mult: float, p: float) -> np.ndarray:
    """Solve the per-coordinate KKT equation for magnitudes ``0 <= a <= t <= 1``.

    For ``p >= 2`` the multiplier is ``mu = exp(log_mult)`` and the equation is
    ``a + (mu * a)**(p-1) = t``; for ``1 < p < 2`` it is ``c = exp(log_mult)`` and
    ``a + c * a**(p-1) = t``, solved in ``v = a**(p-1)``. Both are convex and
    increasing in the unknown, so Newton's method started above the root
    decreases monotonically onto it.
    """
    if p >= 2.0:
        mu = math.exp(log_mult)
        a = np.minimum(t, t ** (1.0 / (p - 1.0)) / mu)
        for _ in range(200):
            ma = mu * a
            g = a + ma ** (p - 1.0) - t
            dg = 1.0 + (p - 1.0) * mu * ma ** (p - 2.0)
            a_new = np.maximum(a - g / dg, 0.0)
            if np.all(np.abs(a_new - a) <= 4e-16 * np.maximum(t, 1e-300)):
                return a_new
            a = a_new
        return a
    c = math.exp(log_mult)
    k = 1.0 / (p - 1.0)
    v = t ** (p - 1.0)
    for _ in range(500):
        vk1 = v ** (k - 1.0)
        g = v * vk1 + c * v - t
        dg = k * vk1 + c
        v_new = np.maximum(v - g / dg, 0.0)
        if np.all(np.abs(v_new - v) <= 4e-16 * np.maximum(v, 1e-300)):
            v = v_new
            break
        v = v_new
    return v ** k


def _project_lp_general(d: np.ndarray, radius: float, p: float) -> np.ndarray:
    """Projection onto ``{||u||_p <= radius}`` for finite ``p > 1``.

    The KKT conditions give ``|u_i| + lam * p * |u_i|**(p-1) = |d_i|``; the
    multiplier is found by bracketed root finding on its logarithm so that
    ``||u||_p = radius``. Magnitudes are scaled by ``max|d_i|`` first, which keeps
    every power at most one.
    """
    if lp_norm(d, p) <= radius:
        return d.copy()
    if radius == 0.0:
        return np.zeros_like(d)
    scale = float(np.abs(d).max())
    t = np.abs(d) / scale
    r = radius / scale
    n = t.size

    def residual(log_mult: float) -> float:
        a = _inner_magnitudes(t, log_mult, p)
        return math.log(max(lp_norm(a, p), 1e-300)) - math.log(r)

    # Upper bracket: every magnitude is then at most r / n**(1/p).
    hi = math.log(n ** (1.0 / p) / r)
    if p < 2.0:
        hi *= p - 1.0
    hi += 1.0
    lo = hi - 10.0
    for _ in range(80):
        if residual(lo) >= 0.0:
            break
        lo -= 10.0
    else:
        # d sits on the sphere up to rounding: the radial scaling is the projection
        return d * (radius / lp_norm(d, p))
    while residual(hi) > 0.0:
        hi += 10.0
    log_mult = brentq(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    a = _inner_magnitudes(t, log_mult, p)
    norm_a = lp_norm(a, p)
    if norm_a > 0.0:
        a *= r / norm_a
    return np.sign(d) * a * scale


def project_lp_ball(x, p: float, radius: float, center=None, method: str = "auto") -> np.ndarray:
    """Euclidean projection of ``x`` onto ``{u : ||u - center||_p <= radius}``.

    ``method="general"`` forces the root-finding path even for ``p`` in
    ``{2}``, which is useful for cross-checking it.
    """
    p = _check_p(p)
    if not radius >= 0.0:
        raise InvalidParameterError(f"radius must be >= 0, got {radius}")
    x = np.asarray(x, dtype=float)
    c = np.zeros_like(x) if center is None else np.asarray(center, dtype=float)
    d = x - c
    if method == "general":
        if math.isinf(p) or p == 1.0:
            raise InvalidParameterError("general projection needs 1 < p < inf")
        return _recentre(c, _project_lp_general(d, radius, p), p, radius)
    if method != "auto":
        raise InvalidParameterError(f"unknown projection method {method!r}")
    if lp_norm(d, p) <= radius:
        return x.copy()
    if math.isinf(p):
        w = np.clip(d, -radius, radius)
    elif p == 2.0:
        w = d * (radius / lp_norm(d, 2.0))
    elif p == 1.0:
        w = _project_l1(d, radius)
    else:
        w = _project_lp_general(d, radius, p)
    return _recentre(c, w, p, radius)


def _recentre(c: np.ndarray, w: np.ndarray, p: float, radius: float) -> np.ndarray:
    """``c + w``, pulled inward by a few ulps if rounding put it outside the ball.

    Matters when ``|c|`` dwarfs ``radius``: adding ``c`` back costs ``ulp(c)``.
    """
    u = c + w
    shrink = 4.0 * np.finfo(float).eps
    for _ in range(60):
        if lp_norm(u - c, p) <= radius:
            return u
        u = c + w * (1.0 - shrink)
        shrink *= 2.0
    return c.copy()


def project_ball(x, ball: BallSpec) -> np.ndarray:
    return project_lp_ball(x, ball.p, ball.radius, ball.center)


def project_columns(V: np.ndarray, p: float, radius: float) -> np.ndarray:
    """Project every column of ``V`` onto the centered ``l_p`` ball of ``radius``."""
    p = _check_p(p)
    if math.isinf(p):
        return np.clip(V, -radius, radius)
    if p == 2.0:
        norms = np.linalg.norm(V, axis=0)
        factor = np.where(norms > radius, radius / np.maximum(norms, 1e-300), 1.0)
        return V * factor
    if p == 1.0:
        A = np.abs(V)
        inside = A.sum(axis=0) <= radius
        if radius == 0.0:
            return np.where(inside, V, 0.0)
        U = -np.sort(-A, axis=0)
        css = np.cumsum(U, axis=0) - radius
        k = np.arange(1, V.shape[0] + 1)[:, None]
        cond = U * k > css
        rho = V.shape[0] - 1 - np.argmax(cond[::-1], axis=0)
        theta = css[rho, np.arange(V.shape[1])] / (rho + 1.0)
        theta = np.where(inside, 0.0, theta)
        return np.sign(V) * np.maximum(A - theta, 0.0)
    return np.column_stack([_project_lp_general(V[:, j], radius, p) for j in range(V.shape[1])])
