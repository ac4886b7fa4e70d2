"""Normalized convex chains, their slope-indexed processes and the Gaussian limit moments.

Times ``u`` in ``[0, 1]`` index slopes through ``tnorm(u) = tan(pi u / 2)``.
Everything below is written in terms of ``h(u) = 1 / (1 + tnorm(u))``, which
equals ``cos / (cos + sin)`` of ``pi u / 2``.  That form stays finite at
``u = 1`` (where ``h = 0``), so no infinite slope ever enters arithmetic.

Exponential model: with ``zeta, xi`` i.i.d. Exp(1), an edge ``(zeta, xi)``
has slope at most ``tnorm(u)`` with probability ``q(u) = 1 - h(u)`` and

* ``E[zeta 1{slope <= tnorm u}] = 1 - h^2``  (the x-coordinate of the limit arc)
* ``E[xi   1{slope <= tnorm u}] = (1 - h)^2``  (its y-coordinate)
* ``E[zeta^2 1{...}] = 2 (1 - h^3)``, ``E[xi^2 1{...}] = 2 (1 - h)^3``
* ``E[zeta xi 1{...}] = 1 - 3 h^2 + 2 h^3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInput, InvalidParameter


def _times(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise InvalidParameter("slope times must lie in [0, 1]")
    return u


def tnorm(u):
    """Slope attached to time u; ``inf`` at ``u = 1``."""
    u = _times(u)
    out = np.where(u >= 1, np.inf, np.tan(0.5 * math.pi * np.where(u >= 1, 0.0, u)))
    return out if out.ndim else float(out)


def h_map(u):
    """``1 / (1 + tnorm(u))``, exactly 1 at u = 0 and 0 at u = 1."""
    u = _times(u)
    a = 0.5 * math.pi * u
    out = np.where(u >= 1, 0.0, np.cos(a) / (np.cos(a) + np.sin(a)))
    return out if out.ndim else float(out)


def q_map(u):
    """Probability that an exponential edge has slope at most ``tnorm(u)``."""
    out = 1.0 - np.asarray(h_map(u))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class NormalizedChain:
    """Edge vectors of a convex chain from (0, 0) to (1, 1), sorted by slope."""

    vectors: np.ndarray

    @property
    def m(self) -> int:
        return len(self.vectors)

    def vertices(self) -> np.ndarray:
        return np.vstack([np.zeros(2), np.cumsum(self.vectors, axis=0)])


def _uniform_partition(m: int, rng: np.random.Generator) -> np.ndarray:
    return np.diff(np.concatenate([[0.0], np.sort(rng.random(m - 1)), [1.0]]))


def _slope_sort(vec: np.ndarray) -> np.ndarray:
    return vec[np.lexsort((vec[:, 0], vec[:, 1] / vec[:, 0]))]


def chain_uniform(m: int, rng: np.random.Generator) -> NormalizedChain:
    """Uniform convex chain of m edges in the unit right-angle triangle."""
    if m < 1:
        raise InvalidParameter("m must be at least 1")
    xs = _uniform_partition(m, rng)
    ys = _uniform_partition(m, rng)[rng.permutation(m)]
    return NormalizedChain(_slope_sort(np.column_stack([xs, ys])))


def chain_from_exponentials(zeta, xi) -> NormalizedChain:
    """Normalize exponential edge components by their sums and sort by slope."""
    zeta = np.asarray(zeta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return NormalizedChain(_slope_sort(np.column_stack([zeta / zeta.sum(), xi / xi.sum()])))


def _below(a, b, u) -> np.ndarray:
    """Mask of edges (a, b) whose slope b / a is at most ``tnorm(u)``."""
    if u >= 1:
        return np.ones(np.shape(a), dtype=bool)
    ang = 0.5 * math.pi * u
    return b * math.cos(ang) <= a * math.sin(ang)


def c_m_process(chain: NormalizedChain, u) -> np.ndarray:
    """Sum of the chain edges whose slope is at most ``tnorm(u)``."""
    u = _times(u)
    v = chain.vectors
    out = np.array([v[_below(v[:, 0], v[:, 1], t)].sum(axis=0) for t in np.atleast_1d(u)])
    return out if u.ndim else out[0]


def cbar_process(zeta, xi, u) -> np.ndarray:
    """Exponential-model process ``(1/m) sum (zeta_i, xi_i) 1{xi_i / zeta_i <= tnorm(u)}``.

    ``zeta`` and ``xi`` may carry leading batch dimensions; the mean is over
    the last axis.  Returns shape ``batch + (2,)`` for scalar ``u``.
    """
    zeta = np.asarray(zeta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    mask = _below(zeta, xi, float(_times(u)))
    return np.stack([(zeta * mask).mean(axis=-1), (xi * mask).mean(axis=-1)], axis=-1)


# ---------------------------------------------------------------------------
# limit arc and moments


def c_infinity(u) -> np.ndarray:
    """Point of the limiting parabola arc at time u."""
    h = np.asarray(h_map(u))
    return np.stack([1.0 - h**2, (1.0 - h) ** 2], axis=-1)


def c_infinity_derivative(u) -> np.ndarray:
    """Derivative of ``c_infinity`` with respect to u."""
    h = np.asarray(h_map(u))
    k = math.pi * (h**2 + (1.0 - h) ** 2)
    return np.stack([k * h, k * (1.0 - h)], axis=-1)


def y_limit_correction(u) -> tuple[tuple[float, float], tuple[float, float]]:
    """Deterministic shape functions of the limit fluctuation process.

    Returns ``((x(u), ax(u)), (y(u), ay(u)))`` where ``ax`` and ``ay`` equal
    ``(2/pi) tnorm(u) / (1 + tnorm(u)^2)`` times ``x'(u)`` and ``y'(u)``.  They
    simplify to ``2 (1-h) h^2`` and ``2 (1-h)^2 h``, both 0 at u = 1.
    """
    h = float(h_map(u))
    x, y = 1.0 - h * h, (1.0 - h) ** 2
    return (x, 2.0 * (1.0 - h) * h * h), (y, 2.0 * (1.0 - h) ** 2 * h)


def _check_pair(s, t):
    if not 0 <= s <= t <= 1:
        raise InvalidParameter("need 0 <= s <= t <= 1")


def moment_helpers(s: float, t: float) -> tuple[float, float, float, float, float]:
    """``(f, e1, e2, v1, v2)`` for the slope window ``(tnorm s, tnorm t]``.

    ``f`` is the probability an exponential edge falls in the window, ``e_p``
    the mean of its p-th coordinate restricted to the window and
    ``v_p = E[coord^2 1{window}] - e_p^2``.
    """
    _check_pair(s, t)
    hs, ht = float(h_map(s)), float(h_map(t))
    gs, gt = 1.0 - hs, 1.0 - ht
    f = hs - ht
    e1 = hs**2 - ht**2
    e2 = gt**2 - gs**2
    v1 = 2.0 * (hs**3 - ht**3) - e1**2
    v2 = 2.0 * (gt**3 - gs**3) - e2**2
    return f, e1, e2, v1, v2


def _cross_moment(s: float, t: float) -> float:
    """``E[zeta xi 1{window}]``."""
    def F(h):
        return 1.0 - 3.0 * h**2 + 2.0 * h**3

    return F(float(h_map(t))) - F(float(h_map(s)))


def conditional_moments(p: int, s: float, t: float) -> tuple[float, float]:
    """Mean and variance of coordinate p of an edge, given its slope is in the window."""
    f, e1, e2, v1, v2 = moment_helpers(s, t)
    e, v = (e1, v1) if p == 1 else (e2, v2)
    if f == 0:
        return 0.0, 0.0
    mean = e / f
    second = (v + e * e) / f
    return mean, second - mean * mean


def _check_coord(p):
    if p not in (1, 2):
        raise InvalidParameter("coordinate index must be 1 or 2")


def ybar_variance(p: int, t: float) -> float:
    """Variance of coordinate p of the centred exponential-model process at time t.

    Splitting on whether an edge falls in ``[0, t]`` gives
    ``f W + f (1 - f) M^2`` with ``M, W`` the conditional mean and variance.
    """
    _check_coord(p)
    _check_pair(0.0, t)
    f = moment_helpers(0.0, t)[0]
    mean, var = conditional_moments(p, 0.0, t)
    return f * var + f * (1.0 - f) * mean**2


def ybar_covariance(p: int, q: int, s: float, t: float) -> float:
    """Covariance of ``Ybar_p(s)`` with the increment ``Ybar_q(t) - Ybar_q(s)``.

    The two slope windows are disjoint, so this is ``-f(0,s) f(s,t) M_p M_q``
    with ``M`` the conditional means on each window.
    """
    _check_coord(p)
    _check_coord(q)
    if not 0 <= s < t <= 1:
        raise InvalidParameter("need 0 <= s < t <= 1")
    f0 = moment_helpers(0.0, s)[0]
    f1 = moment_helpers(s, t)[0]
    m0 = conditional_moments(p, 0.0, s)[0]
    m1 = conditional_moments(q, s, t)[0]
    return -f0 * f1 * m0 * m1


def ybar_two_time_covariance(p: int, q: int, s: float, t: float) -> float:
    """``Cov(Ybar_p(s), Ybar_q(t))`` for ``s < t``, rebuilt from a same-time term and an increment term."""
    _check_coord(p)
    _check_coord(q)
    if p == q:
        same = ybar_variance(p, s)
    else:
        _, e1, e2, _, _ = moment_helpers(0.0, s)
        same = _cross_moment(0.0, s) - e1 * e2
    return same + ybar_covariance(p, q, s, t)


# ---------------------------------------------------------------------------
# Hausdorff distance


def resample_closed(poly_line, count: int) -> np.ndarray:
    """Original vertices plus ``count`` points equally spaced in arc length."""
    pts = np.asarray(poly_line, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    if cum[-1] == 0:
        return pts[:1].copy()
    t = np.linspace(0.0, cum[-1], count, endpoint=False)
    x = np.interp(t, cum, closed[:, 0])
    y = np.interp(t, cum, closed[:, 1])
    return np.vstack([pts, np.column_stack([x, y])])


def _point_to_polyline(query: np.ndarray, line: np.ndarray, k: int = 8) -> np.ndarray:
    """Exact distance from each query point to the closed polyline ``line``.

    Candidate segments are those adjacent to the k nearest polyline vertices.
    """
    tree = cKDTree(line)
    k = min(k, len(line))
    _, idx = tree.query(query, k=k)
    idx = np.atleast_2d(idx.reshape(len(query), k))
    best = np.full(len(query), np.inf)
    nv = len(line)
    for step in (0, -1):
        a = line[(idx + step) % nv]
        b = line[(idx + step + 1) % nv]
        ab = b - a
        ap = query[:, None, :] - a
        denom = np.maximum(np.einsum("ijk,ijk->ij", ab, ab), 1e-300)
        lam = np.clip(np.einsum("ijk,ijk->ij", ap, ab) / denom, 0.0, 1.0)
        d = np.hypot(*(ap - lam[..., None] * ab).transpose(2, 0, 1))
        best = np.minimum(best, d.min(axis=1))
    return best


def hausdorff_distance(a, b, resolution: int = 2048) -> float:
    """Symmetric Hausdorff distance between two closed polylines.

    Each curve is densely resampled (``resolution`` points plus its vertices)
    and distances to the other curve are measured exactly to its segments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise InvalidInput("polylines must be non-empty")
    if len(a) == 1 or len(b) == 1:
        ra, rb = resample_closed(a, resolution), resample_closed(b, resolution)
        da, _ = cKDTree(rb).query(ra)
        db, _ = cKDTree(ra).query(rb)
        return float(max(da.max(), db.max()))
    ra, rb = resample_closed(a, resolution), resample_closed(b, resolution)
    return float(max(_point_to_polyline(ra, rb).max(), _point_to_polyline(rb, ra).max()))
