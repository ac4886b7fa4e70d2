"""Samplers for n points in convex position inside a regular polygon.

Four samplers are provided:

* ``rejection_sample`` draws i.i.d. uniform points until they are in convex
  position.  It is exact for every kappa but exponentially slow in n.
* ``kappa_sample`` samples the law of the configuration conditioned on its
  circumscribed polygon having all kappa sides of positive length.  It works
  through the encoding (ell, s, side partitions) -> points.
* ``triangle_sample`` and ``square_sample`` are the fast exact samplers for
  kappa = 3 and kappa = 4.

Size-vector convention: ``s[j]`` is the number of polygon edges between the
contact points ``cp[j-1]`` and ``cp[j]``, i.e. in the corner at the ECP vertex
``b[j-1]``.  Side ``j`` of the ECP is cut into ``s[j] + s[j+1]`` pieces: the
first ``s[j]`` pieces are the side-j components of the corner ``b[j-1]``
edges, the remaining ``s[j+1]`` pieces are the side-j components of the
corner ``b[j]`` edges.  The contact point ``cp[0]`` is the lowest point and
is always listed first.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, DomainError, InvalidInput, InvalidParameter
from .geometry import (
    Ecp,
    RegularPolygon,
    closure_lengths,
    corner_map_inverse,
    cyc,
    make_polygon,
    side_lengths,
)

DEFAULT_REJECTION_BUDGET = 10**8
DEFAULT_STEP_BUDGET = 10**9


# ---------------------------------------------------------------------------
# random streams


def make_rng(seed: int | None) -> np.random.Generator:
    """PCG64 generator; the same seed gives the same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


def named_stream(master_seed: int, name: str) -> np.random.Generator:
    """Independent stream derived from a master seed and a label."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(zlib.crc32(name.encode()),))
    return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# containers


@dataclass
class ConvexConfig:
    """Points in canonical convex order and their circumscribed-polygon data."""

    points: np.ndarray
    ell: np.ndarray
    ecp: Ecp
    s: np.ndarray
    contact: np.ndarray
    algorithm: str = ""
    trials: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def contact_points(self) -> np.ndarray:
        return self.points[self.contact]


# ---------------------------------------------------------------------------
# uniform points and convexity


def uniform_in_polygon(poly: RegularPolygon, rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform point(s) in the polygon via an area-weighted triangle fan."""
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    count = int(np.prod(shape)) if shape else 1
    v = poly.vertices
    a, b = v[1:-1] - v[0], v[2:] - v[0]
    areas = 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    tri = rng.choice(len(areas), size=count, p=areas / areas.sum())
    u = rng.random((count, 2))
    flip = u.sum(axis=1) > 1
    u[flip] = 1 - u[flip]
    pts = v[0] + u[:, :1] * a[tri] + u[:, 1:] * b[tri]
    return pts.reshape(shape + (2,))


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _angular_order(pts: np.ndarray) -> np.ndarray:
    centre = pts.mean(axis=-2, keepdims=True)
    rel = pts - centre
    ang = np.arctan2(rel[..., 1], rel[..., 0])
    return np.argsort(ang, axis=-1, kind="stable")


def convex_position_mask(points) -> np.ndarray:
    """Vectorised convex-position test over a batch of shape ``(..., n, 2)``.

    Points sorted by angle around their centroid are in convex position iff
    every consecutive triple turns strictly left.  Collinear triples, and turns
    too small to be told apart from rounding error, count as non-convex.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[-2]
    if n < 3:
        raise InvalidParameter("need at least three points")
    order = _angular_order(pts)
    srt = np.take_along_axis(pts, order[..., None], axis=-2)
    edges = np.roll(srt, -1, axis=-2) - srt
    nxt = np.roll(edges, -1, axis=-2)
    turns = _cross(edges, nxt)
    # rounding in a cross product of coordinate differences is bounded by a
    # few ulps of scale * (|e1| + |e2|); demand a turn well above that
    span = np.max(np.abs(pts), axis=(-2, -1))
    size = np.hypot(edges[..., 0], edges[..., 1]) + np.hypot(nxt[..., 0], nxt[..., 1])
    tol = 1e-13 * span[..., None] * size
    return np.all(turns > tol, axis=-1)


def is_convex_position(points) -> bool:
    """True iff every point is a vertex of the convex hull of the set."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise InvalidParameter("need an (n, 2) array with n >= 3")
    if len(np.unique(pts, axis=0)) != len(pts):
        raise InvalidInput("duplicate points")
    return bool(convex_position_mask(pts))


def canonical_order(points) -> np.ndarray:
    """Permutation putting points in convex canonical order.

    The first point is the one with minimal y (then minimal x) and the rest
    follow counter-clockwise, so the directions of consecutive difference
    vectors are non-decreasing in ``[0, 2 pi)``.
    """
    pts = np.asarray(points, dtype=float)
    if not is_convex_position(pts):
        raise DomainError("points are not in convex position")
    order = _angular_order(pts)
    first = np.lexsort((pts[:, 0], pts[:, 1]))[0]
    k = int(np.nonzero(order == first)[0][0])
    return np.roll(order, -k)


# ---------------------------------------------------------------------------
# circumscribed polygon of a configuration


def ecp_of(poly: RegularPolygon, points, ordered: bool = False) -> ConvexConfig:
    """Boundary distances, ECP, contact points and size-vector of a convex tuple.

    The contact point of side ``j`` is a point at minimal distance from that
    side; exact ties (a null event for continuous samples) go to the point
    that comes first in canonical order.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise InvalidParameter("need at least three points")
    if not ordered:
        pts = pts[canonical_order(pts)]
    n, k = len(pts), poly.kappa
    dist = poly.signed_distances(pts)
    scale = poly.r
    if np.any(dist < -1e-12 * scale):
        raise DomainError("points lie outside the polygon")
    ell = np.maximum(dist.min(axis=0), 0.0)
    tol = 1e-12 * scale
    contact = np.array([int(np.nonzero(dist[:, j] <= ell[j] + tol)[0][0]) for j in range(k)])
    # unwrap the contact indices so they are non-decreasing around the polygon
    unwrapped = contact.copy()
    for j in range(1, k):
        if unwrapped[j] < unwrapped[j - 1]:
            unwrapped[j] += n
    s = np.empty(k, dtype=np.int64)
    s[1:] = np.diff(unwrapped)
    s[0] = n + unwrapped[0] - unwrapped[-1]
    if s[0] == n and k > 1 and np.all(s[1:] == 0):
        s[0] = 0
    return ConvexConfig(points=pts, ell=ell, ecp=side_lengths(poly, ell), s=s, contact=contact)


def full_sided(poly: RegularPolygon, config: ConvexConfig, tol: float = 0.0) -> bool:
    """True iff every ECP side has positive length."""
    return bool(np.all(config.ecp.c > tol))


def in_size_set(s, n: int) -> bool:
    s = np.asarray(s)
    return bool(s.sum() == n and np.all(s >= 0) and np.all(s + np.roll(s, -1) >= 1))


# ---------------------------------------------------------------------------
# rejection sampler


def rejection_batch(poly: RegularPolygon, n: int, count: int, rng: np.random.Generator,
                    budget: int = DEFAULT_REJECTION_BUDGET, batch: int = 1 << 14):
    """Collect ``count`` uniform n-tuples in convex position.

    Returns the accepted tuples (unordered, shape ``(count, n, 2)``) and the
    number of tuples drawn up to and including the last accepted one.
    """
    if n < 3:
        raise InvalidParameter("n must be at least 3")
    found, trials = [], 0
    need = count
    while need > 0:
        if trials >= budget:
            raise BudgetError(f"rejection budget of {budget} tuples exhausted")
        size = min(batch, budget - trials)
        pts = uniform_in_polygon(poly, rng, (size, n))
        ok = np.nonzero(convex_position_mask(pts))[0]
        if len(ok) >= need:
            ok = ok[:need]
            trials += int(ok[-1]) + 1
        else:
            trials += size
        found.append(pts[ok])
        need -= len(ok)
    return np.concatenate(found, axis=0), trials


def rejection_sample(poly: RegularPolygon, n: int, rng: np.random.Generator,
                     budget: int = DEFAULT_REJECTION_BUDGET) -> tuple[ConvexConfig, int]:
    """Redraw n uniform points until they are in convex position."""
    pts, trials = rejection_batch(poly, n, 1, rng, budget=budget, batch=256)
    cfg = ecp_of(poly, pts[0])
    cfg.algorithm, cfg.trials = "rejection", trials
    return cfg, trials


# ---------------------------------------------------------------------------
# kappa-sampler


def sample_ell(poly: RegularPolygon, n: int, rng: np.random.Generator,
               budget: int = DEFAULT_STEP_BUDGET) -> np.ndarray:
    """Boundary distances with density proportional to ``c_tilde(ell)^(2n - kappa)`` on the
    strictly feasible region, where ``c_tilde = sum(c) / m = P - 2 sum(ell)``."""
    k = poly.kappa
    if n < k:
        raise InvalidParameter("n must be at least kappa")
    for _ in range(budget):
        total = 0.5 * poly.p_const * rng.beta(k + 1, 2 * n - k)
        cuts = np.sort(rng.uniform(0.0, total, k))
        ell = np.diff(cuts, prepend=0.0)
        c = poly.r - closure_lengths(poly, ell)
        if np.all(c > 0):
            return ell
    raise BudgetError("boundary-distance loop exhausted its budget")


def sample_sizes(poly: RegularPolygon, c_tilde, n: int, rng: np.random.Generator,
                 count: int | None = None, budget: int = DEFAULT_STEP_BUDGET,
                 batch: int = 4096) -> np.ndarray:
    """Size-vector with law proportional to ``prod p_j^N_j / (s_j! N_j!)``,
    ``p = c_tilde / sum(c_tilde)`` and ``N_j = s_j + s_{j+1} - 1``.

    Proposals pair a uniform multinomial size-vector with a multinomial cut
    count and are kept when the two agree.  With ``count`` set, that many
    independent accepted vectors are returned as a ``(count, kappa)`` array.
    """
    k = poly.kappa
    p = np.asarray(c_tilde, dtype=float)
    if p.shape != (k,) or np.any(p <= 0):
        raise InvalidParameter("c_tilde must have kappa positive entries")
    p = p / p.sum()
    want = 1 if count is None else count
    got, done = [], 0
    have = 0
    while have < want:
        if done >= budget:
            raise BudgetError("size-vector loop exhausted its budget")
        size = min(batch, budget - done)
        s = rng.multinomial(n, np.full(k, 1.0 / k), size=size)
        cuts = rng.multinomial(2 * n - k, p, size=size)
        ok = np.all(cuts == s + np.roll(s, -1, axis=1) - 1, axis=1)
        got.append(s[ok])
        have += int(ok.sum())
        done += size
    out = np.concatenate(got)[:want]
    return out[0] if count is None else out


def _pieces(c: float, u: np.ndarray) -> np.ndarray:
    return np.diff(np.concatenate([[0.0], u, [c]]))


def assemble_from_partitions(poly: RegularPolygon, ell, s, partitions) -> ConvexConfig:
    """Build the convex tuple from boundary distances, size-vector and side partitions.

    ``partitions[j]`` holds the sorted cut points on ECP side ``j`` measured from
    ``b[j-1]``; there must be ``s[j] + s[j+1] - 1`` of them.
    """
    k = poly.kappa
    ell = np.asarray(ell, dtype=float)
    s = np.asarray(s, dtype=np.int64)
    ecp = side_lengths(poly, ell)
    pieces = [_pieces(ecp.c[j], np.asarray(partitions[j], dtype=float)) for j in range(k)]
    d = poly.directions
    start = ecp.b[k - 1] + pieces[0][: s[0]].sum() * d[0]
    steps = []
    for j in range(k):
        m = s[cyc(j + 1, k)]
        if m == 0:
            continue
        a = pieces[j][s[j]:]
        b = pieces[cyc(j + 1, k)][:m]
        order = np.lexsort((a, b / a))
        local = np.column_stack([a[order], b[order]])
        steps.append(local @ corner_map_inverse(poly, j).T)
    steps = np.vstack(steps)
    pts = start + np.vstack([np.zeros(2), np.cumsum(steps[:-1], axis=0)])
    contact = np.cumsum(np.concatenate([[0], s[1:]])) % len(pts)
    return ConvexConfig(points=pts, ell=ell, ecp=ecp, s=s.copy(), contact=contact)


def _check_encoding(poly: RegularPolygon, ell, s, n: int | None = None):
    k = poly.kappa
    ell = np.asarray(ell, dtype=float)
    s = np.asarray(s, dtype=np.int64)
    if ell.shape != (k,) or s.shape != (k,):
        raise DomainError("ell and s must have kappa entries")
    if np.any(ell < 0) or np.any(poly.r - closure_lengths(poly, ell) <= 0):
        raise DomainError("ell is not strictly feasible")
    if not in_size_set(s, int(s.sum()) if n is None else n):
        raise DomainError("s is not an admissible size-vector")
    return ell, s


def assemble_points(poly: RegularPolygon, ell, s, rng: np.random.Generator) -> ConvexConfig:
    """Draw uniform side partitions and build the corresponding convex tuple."""
    ell, s = _check_encoding(poly, ell, s)
    c = poly.r - closure_lengths(poly, ell)
    k = poly.kappa
    parts = [np.sort(rng.uniform(0.0, c[j], s[j] + s[cyc(j + 1, k)] - 1)) for j in range(k)]
    return assemble_from_partitions(poly, ell, s, parts)


def _encoding_batch(poly: RegularPolygon, n: int, size: int, rng: np.random.Generator):
    """One batch of joint proposals; returns accepted (ell, s) rows."""
    k = poly.kappa
    total = 0.5 * poly.p_const * rng.beta(k + 1, 2 * n - k, size=size)
    cuts = np.sort(rng.random((size, k)), axis=1) * total[:, None]
    ell = np.diff(cuts, axis=1, prepend=0.0)
    c = poly.r - closure_lengths(poly, ell)
    feasible = np.all(c > 0, axis=1)
    p = np.where(feasible[:, None], np.maximum(c, 0.0), 1.0)
    p = p / p.sum(axis=1, keepdims=True)
    s = rng.multinomial(n, np.full(k, 1.0 / k), size=size)
    counts = rng.multinomial(2 * n - k, p)
    ok = feasible & np.all(counts == s + np.roll(s, -1, axis=1) - 1, axis=1)
    return ell[ok], s[ok]


def sample_encodings(poly: RegularPolygon, n: int, count: int, rng: np.random.Generator,
                     budget: int = DEFAULT_STEP_BUDGET, batch: int = 1 << 14):
    """Draw ``count`` pairs (ell, s) from their joint law under full-sided conditioning.

    Each proposal draws ell (density proportional to ``c_tilde^(2n-kappa)``), a
    uniform multinomial size-vector and a multinomial cut count; the whole
    triple is accepted when the cut counts match the size-vector.  Restarting
    from ell on failure is what makes the accepted ell carry the correct
    marginal for every kappa.
    """
    if n < poly.kappa:
        raise InvalidParameter("n must be at least kappa")
    ells, ss, drawn = [], [], 0
    have = 0
    while have < count:
        if drawn >= budget:
            raise BudgetError(f"encoding budget of {budget} proposals exhausted")
        size = min(batch, budget - drawn)
        e, s = _encoding_batch(poly, n, size, rng)
        drawn += size
        ells.append(e)
        ss.append(s)
        have += len(e)
    return np.concatenate(ells)[:count], np.concatenate(ss)[:count], drawn


def kappa_sample(poly: RegularPolygon, n: int, rng: np.random.Generator,
                 budget: int = DEFAULT_STEP_BUDGET) -> ConvexConfig:
    """Exact sample of n points in convex position with a full-sided circumscribed polygon."""
    batch = 256
    drawn = 0
    while True:
        e, s = _encoding_batch(poly, n, batch, rng)
        drawn += batch
        if len(e):
            cfg = assemble_points(poly, e[0], s[0], rng)
            cfg.algorithm, cfg.trials = "kappa", drawn
            return cfg
        if drawn >= budget:
            raise BudgetError(f"encoding budget of {budget} proposals exhausted")
        batch = min(batch * 2, 1 << 16)


# ---------------------------------------------------------------------------
# triangle and square samplers


def _binary_vector_of_weight(length: int, weight: int, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli(1/2) draws corrected to exactly ``weight`` ones by flipping random entries."""
    bits = rng.random(length) < 0.5
    excess = int(bits.sum()) - weight
    if excess > 0:
        bits[rng.choice(np.flatnonzero(bits), excess, replace=False)] = False
    elif excess < 0:
        bits[rng.choice(np.flatnonzero(~bits), -excess, replace=False)] = True
    return bits


def triangle_sizes(n: int, rng: np.random.Generator) -> np.ndarray:
    """Size-vector for kappa = 3, with law proportional to ``prod C(n-1, s_j)``."""
    bits = _binary_vector_of_weight(3 * (n - 1), n, rng)
    return bits.reshape(3, n - 1).sum(axis=1).astype(np.int64)


def triangle_sample(n: int, rng: np.random.Generator) -> ConvexConfig:
    """Exact sample of n uniform points in the unit-area triangle conditioned on convex position."""
    if n < 3:
        raise InvalidParameter("n must be at least 3")
    poly = make_polygon(3)
    s = triangle_sizes(n, rng)
    u = np.sort(rng.uniform(0.0, poly.r, 2 * n))
    ell = 0.5 * math.sqrt(3.0) * np.diff(u[:3], prepend=0.0)
    rest = rng.permutation(u[3:] - u[2])
    cuts = s + np.roll(s, -1) - 1
    bounds = np.cumsum(cuts)[:-1]
    parts = [np.sort(g) for g in np.split(rest, bounds)]
    cfg = assemble_from_partitions(poly, ell, s, parts)
    cfg.algorithm = "triangle"
    return cfg


def square_split(n: int, rng: np.random.Generator) -> int:
    """Number of positive increments: first of two Binomial(n-1, 1/2) conditioned to sum to n."""
    while True:
        a, b = rng.binomial(n - 1, 0.5, size=2)
        if a + b == n:
            return int(a)


def _signed_increments(n: int, positive: int, rng: np.random.Generator):
    """Sorted uniform coordinates split into a lower and an upper monotone chain."""
    xs = np.sort(rng.random(n))
    inner = xs[1:-1]
    pick = np.zeros(n - 2, dtype=bool)
    pick[rng.permutation(n - 2)[: positive - 1]] = True
    low = np.concatenate([[xs[0]], inner[pick], [xs[-1]]])
    high = np.concatenate([[xs[0]], inner[~pick], [xs[-1]]])
    incr = np.concatenate([np.diff(low), -np.diff(high)])
    return xs[0], 1.0 - xs[-1], incr


def square_sample(n: int, rng: np.random.Generator) -> ConvexConfig:
    """Exact sample of n uniform points in the unit square conditioned on convex position."""
    if n < 3:
        raise InvalidParameter("n must be at least 3")
    poly = make_polygon(4)
    i = square_split(n, rng)
    j = square_split(n, rng)
    left, right, h = _signed_increments(n, i, rng)
    bottom, top, v = _signed_increments(n, j, rng)
    w = np.column_stack([h, v[rng.permutation(n)]])
    ang = np.mod(np.arctan2(w[:, 1], w[:, 0]), 2 * math.pi)
    w = w[np.argsort(ang, kind="stable")]
    pts = np.vstack([np.zeros(2), np.cumsum(w[:-1], axis=0)])
    pts += np.array([left, bottom]) - pts.min(axis=0)
    first = np.lexsort((pts[:, 0], pts[:, 1]))[0]
    pts = np.roll(pts, -first, axis=0)
    cfg = ecp_of(poly, pts, ordered=True)
    cfg.algorithm = "square"
    cfg.extra = {"i": i, "j": j, "ell_drawn": np.array([bottom, right, top, left])}
    return cfg


SAMPLERS = ("kappa", "triangle", "square", "rejection")


def sample(kappa: int, n: int, algorithm: str, rng: np.random.Generator) -> ConvexConfig:
    poly = make_polygon(kappa)
    if algorithm == "kappa":
        return kappa_sample(poly, n, rng)
    if algorithm == "triangle":
        if kappa != 3:
            raise DomainError("the triangle sampler needs kappa=3")
        return triangle_sample(n, rng)
    if algorithm == "square":
        if kappa != 4:
            raise DomainError("the square sampler needs kappa=4")
        return square_sample(n, rng)
    if algorithm == "rejection":
        return rejection_sample(poly, n, rng)[0]
    raise InvalidParameter(f"unknown algorithm {algorithm!r}")
