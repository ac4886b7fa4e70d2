"""Regular polygons of area one and the equiangular circumscribed polygon.

Conventions used across the package
-----------------------------------
Sides and vertices are numbered from 0.  Side ``j`` runs from ``vertices[j]``
to ``vertices[j + 1]`` (indices taken mod kappa), so ``vertices[0]`` sits at
the origin and side 0 lies on the positive X-axis.  The polygon is traversed
counter-clockwise and ``directions[j]`` is the unit vector of side ``j``.

For a point set inside the polygon, ``ell[j]`` is its distance to the line
carrying side ``j``.  The equiangular circumscribed polygon (ECP) has its
side ``j`` parallel to side ``j`` of the host polygon, at distance ``ell[j]``
from it.  ``b[j]`` is the ECP vertex where ECP sides ``j`` and ``j + 1`` meet,
so ECP side ``j`` runs from ``b[j - 1]`` to ``b[j]`` and has length ``c[j]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidParameter


def cyc(j: int, kappa: int) -> int:
    """Reduce a side index modulo kappa."""
    return j % kappa


@dataclass(frozen=True)
class RegularPolygon:
    kappa: int
    r: float
    theta: float
    m_const: float
    p_const: float
    vertices: np.ndarray = field(repr=False)
    midpoints: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)

    @property
    def beta(self) -> float:
        """Exterior angle, the turn between consecutive sides."""
        return math.pi - self.theta

    @property
    def normals(self) -> np.ndarray:
        """Inward unit normals of the sides."""
        d = self.directions
        return np.column_stack([-d[:, 1], d[:, 0]])

    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def signed_distances(self, points) -> np.ndarray:
        """Distances of points to every side line, positive inside.

        Returns an array of shape ``points.shape[:-1] + (kappa,)``.
        """
        pts = np.asarray(points, dtype=float)
        d = self.directions
        rel_x = pts[..., None, 0] - self.vertices[:, 0]
        rel_y = pts[..., None, 1] - self.vertices[:, 1]
        return d[:, 0] * rel_y - d[:, 1] * rel_x

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        return np.all(self.signed_distances(points) >= -tol, axis=-1)


def make_polygon(kappa: int) -> RegularPolygon:
    """Regular kappa-gon of unit area, first vertex at the origin, first side along +X."""
    if not isinstance(kappa, (int, np.integer)) or kappa < 3:
        raise InvalidParameter(f"kappa must be an integer >= 3, got {kappa!r}")
    kappa = int(kappa)
    r = math.sqrt(4.0 * math.tan(math.pi / kappa) / kappa)
    theta = (kappa - 2) * math.pi / kappa
    m_const = (1.0 + math.cos(theta)) / math.sin(theta)
    p_const = kappa * r / m_const
    angles = (math.pi - theta) * np.arange(kappa)
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    steps = r * directions
    vertices = np.vstack([np.zeros(2), np.cumsum(steps, axis=0)[:-1]])
    midpoints = vertices + 0.5 * steps
    return RegularPolygon(kappa, r, theta, m_const, p_const, vertices, midpoints, directions)


@dataclass(frozen=True)
class Ecp:
    """Side lengths and vertices of an equiangular circumscribed polygon."""

    c: np.ndarray
    b: np.ndarray

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.c >= 0.0))


def _check_ell(poly: RegularPolygon, ell) -> np.ndarray:
    ell = np.asarray(ell, dtype=float)
    if ell.shape != (poly.kappa,):
        raise InvalidParameter(f"ell must have {poly.kappa} entries, got shape {ell.shape}")
    if np.any(ell < 0):
        raise InvalidParameter("boundary distances must be non-negative")
    return ell


def closure_lengths(poly: RegularPolygon, ell) -> np.ndarray:
    """The amount by which each side is shortened: ``(l[j-1] + l[j+1] + 2 l[j] cos t) / sin t``."""
    ell = np.asarray(ell, dtype=float)
    prev = np.roll(ell, 1, axis=-1)
    nxt = np.roll(ell, -1, axis=-1)
    return (prev + nxt + 2.0 * ell * math.cos(poly.theta)) / math.sin(poly.theta)


def ecp_vertices(poly: RegularPolygon, ell) -> np.ndarray:
    """Intersection points of consecutive offset side lines, ``b[j]`` for sides j, j+1."""
    ell = np.asarray(ell, dtype=float)
    nrm = poly.normals
    offs = np.einsum("ij,ij->i", nrm, poly.vertices) + ell
    b = np.empty((poly.kappa, 2))
    for j in range(poly.kappa):
        k = cyc(j + 1, poly.kappa)
        a = np.array([nrm[j], nrm[k]])
        b[j] = np.linalg.solve(a, [offs[j], offs[k]])
    return b


def side_lengths(poly: RegularPolygon, ell) -> Ecp:
    """ECP side lengths and vertices for the boundary distances ``ell``.

    The result is returned even when some ``c[j] < 0``; check ``Ecp.feasible``.
    """
    ell = _check_ell(poly, ell)
    c = poly.r - closure_lengths(poly, ell)
    return Ecp(c=c, b=ecp_vertices(poly, ell))


def in_feasible_region(poly: RegularPolygon, ell, strict: bool = False) -> bool:
    """Whether every induced side length is non-negative (positive when ``strict``).

    Side lengths within ``1e-12 * r`` of zero are treated as exactly zero.
    """
    ell = np.asarray(ell, dtype=float)
    if ell.shape != (poly.kappa,) or np.any(ell < 0):
        return False
    c = poly.r - closure_lengths(poly, ell)
    tol = 1e-12 * poly.r
    return bool(np.all(c > tol) if strict else np.all(c >= -tol))


def perimeter_defect(poly: RegularPolygon, ell) -> float:
    """Residual of ``sum(c) + 2 m sum(ell) = kappa r``; zero up to rounding."""
    ell = np.asarray(ell, dtype=float)
    c = poly.r - closure_lengths(poly, ell)
    return float(c.sum() + 2.0 * poly.m_const * ell.sum() - poly.kappa * poly.r)


def corner_map_inverse(poly: RegularPolygon, j: int) -> np.ndarray:
    """Matrix sending local corner coordinates ``(a, b)`` to ``a d[j] + b d[j+1]``.

    Corner ``j`` is the ECP corner ``b[j]``, between sides ``j`` and ``j + 1``.
    Its determinant equals ``sin(theta)``.
    """
    if not 0 <= j < poly.kappa:
        raise InvalidParameter(f"side index must be in 0..{poly.kappa - 1}")
    d = poly.directions
    return np.column_stack([d[j], d[cyc(j + 1, poly.kappa)]])


# ---------------------------------------------------------------------------
# limit shape


def limit_shape_arcs(poly: RegularPolygon) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Quadratic Bezier arcs ``(start, control, end)`` of the limit shape.

    Arc ``i`` joins the midpoint of side ``i`` to the midpoint of side ``i + 1``
    with the shared polygon vertex as control point; it is the parabola
    tangent to both sides at their midpoints.
    """
    k = poly.kappa
    return [
        (poly.midpoints[i], poly.vertices[cyc(i + 1, k)], poly.midpoints[cyc(i + 1, k)])
        for i in range(k)
    ]


def _bezier(p0, p1, p2, t):
    t = np.asarray(t, dtype=float)[:, None]
    return (1 - t) ** 2 * p0 + 2 * t * (1 - t) * p1 + t**2 * p2


def _bezier_tangent(p0, p1, p2, t):
    t = np.asarray(t, dtype=float)[:, None]
    return 2 * (1 - t) * (p1 - p0) + 2 * t * (p2 - p1)


def limit_shape_subdivision(poly: RegularPolygon, pts_per_arc: int) -> tuple[np.ndarray, np.ndarray]:
    """Points on the limit shape together with exact tangent directions."""
    if pts_per_arc < 2:
        raise InvalidParameter("pts_per_arc must be at least 2")
    t = np.arange(pts_per_arc) / pts_per_arc
    pts, tans = [], []
    for p0, p1, p2 in limit_shape_arcs(poly):
        pts.append(_bezier(p0, p1, p2, t))
        tans.append(_bezier_tangent(p0, p1, p2, t))
    return np.vstack(pts), np.vstack(tans)


def limit_shape(poly: RegularPolygon, pts_per_arc: int = 256) -> np.ndarray:
    """Closed polyline (without repeated endpoint) tracing the limit shape."""
    return limit_shape_subdivision(poly, pts_per_arc)[0]


def polygon_subdivision(poly: RegularPolygon, pts_per_side: int) -> tuple[np.ndarray, np.ndarray]:
    """Points on the polygon boundary, vertices included, with side directions as tangents."""
    t = np.arange(pts_per_side) / pts_per_side
    pts, tans = [], []
    for j in range(poly.kappa):
        a = poly.vertices[j]
        b = poly.vertices[cyc(j + 1, poly.kappa)]
        pts.append(a + t[:, None] * (b - a))
        tans.append(np.repeat(poly.directions[j][None, :], pts_per_side, axis=0))
    return np.vstack(pts), np.vstack(tans)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def affine_perimeter(points, tangents=None, closed: bool = True) -> float:
    """Affine perimeter ``2 * sum(T_i ** (1/3))`` of a convex curve given by a subdivision.

    ``T_i`` is the area of the triangle formed by two consecutive subdivision
    points and the intersection of their tangent lines.  Tangent directions
    are estimated by central differences when not supplied.  Points must be
    ordered counter-clockwise along a convex curve.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise InvalidInput("need at least three planar points")
    if tangents is None:
        if closed:
            tangents = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
        else:
            tangents = np.gradient(pts, axis=0)
    tans = np.asarray(tangents, dtype=float)

    idx = np.arange(len(pts) if closed else len(pts) - 1)
    nxt = (idx + 1) % len(pts)
    edges = pts[nxt] - pts[idx]
    scale = float(np.max(np.abs(pts - pts.mean(axis=0)))) or 1.0
    turns = _cross(edges, np.roll(edges, -1, axis=0))
    if not closed:
        turns = turns[:-1]
    if np.any(turns < -1e-12 * scale**2):
        raise InvalidInput("subdivision is not convex and counter-clockwise")

    x0, x1 = pts[idx], pts[nxt]
    t0, t1 = tans[idx], tans[nxt]
    denom = _cross(t0, t1)
    ok = np.abs(denom) > 1e-14 * np.hypot(*t0.T) * np.hypot(*t1.T)
    # tangent-line intersection y = x0 + lam * t0
    lam = np.where(ok, _cross(x1 - x0, t1) / np.where(ok, denom, 1.0), 0.0)
    y = x0 + lam[:, None] * t0
    area = 0.5 * np.abs(_cross(y - x0, x1 - x0))
    # cube roots amplify rounding noise, so areas at the noise floor count as zero
    floor = 1e-13 * scale * np.hypot(*(x1 - x0).T)
    area = np.where(ok & (area > floor), area, 0.0)
    return 2.0 * float(np.sum(np.cbrt(area)))


def ap_star(poly: RegularPolygon) -> float:
    """Closed-form affine perimeter of the limit shape, ``kappa (r^2 sin theta)^(1/3)``."""
    return poly.kappa * (poly.r**2 * math.sin(poly.theta)) ** (1.0 / 3.0)
