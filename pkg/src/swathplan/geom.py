"""Planar geometry primitives shared by every planning stage.

Rings are stored as ``(n, 2)`` float64 arrays without a repeated closing
vertex. Polygons are validated when constructed and never mutated afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import DegenerateGeometryError, InvalidPolygonError

EPS_GEOM = 1e-9  # metres; point/edge coincidence tolerance


class Point2(NamedTuple):
    x: float
    y: float


class Location(IntEnum):
    OUTSIDE = kernels.OUTSIDE
    INSIDE = kernels.INSIDE
    BOUNDARY = kernels.BOUNDARY


def ring_signed_area(ring) -> float:
    """Shoelace area of a ring, positive when counter-clockwise."""
    r = np.asarray(ring, dtype=float)
    x, y = r[:, 0], r[:, 1]
    # shift to the first vertex to limit cancellation on large coordinates
    x = x - x[0]
    y = y - y[0]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def ring_edges(ring) -> np.ndarray:
    r = np.asarray(ring, dtype=float)
    return np.hstack([r, np.roll(r, -1, axis=0)])


def _clean_ring(ring, name):
    r = np.asarray(ring, dtype=float)
    if r.ndim != 2 or r.shape[1] != 2:
        raise InvalidPolygonError(f"{name}: expected an (n, 2) coordinate array, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise InvalidPolygonError(f"{name}: non-finite coordinate")
    if len(r) > 1 and np.hypot(*(r[0] - r[-1])) <= EPS_GEOM:
        r = r[:-1]
    if len(r) > 1:
        step = np.hypot(*(np.roll(r, -1, axis=0) - r).T)
        r = r[step > EPS_GEOM]
    if len(r) < 3:
        raise InvalidPolygonError(f"{name}: fewer than 3 distinct vertices")
    return r


def _segment_distance(e1, e2):
    """Pairwise minimum distance between segment rows of e1 (a, 4) and e2 (b, 4)."""
    a1, b1 = e1[:, None, :2], e1[:, None, 2:]
    a2, b2 = e2[None, :, :2], e2[None, :, 2:]
    d1, d2 = b1 - a1, b2 - a2
    w = a2 - a1

    def cross(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    den = cross(d1, d2)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = cross(w, d2) / den
        s = cross(w, d1) / den
    crossing = (np.abs(den) > 0) & (t > 0) & (t < 1) & (s > 0) & (s < 1)

    def pt_seg(p, a, b):
        ab = b - a
        ll = (ab * ab).sum(-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.clip(((p - a) * ab).sum(-1) / ll, 0.0, 1.0)
        u = np.where(ll > 0, u, 0.0)
        q = a + u[..., None] * ab - p
        return np.hypot(q[..., 0], q[..., 1])

    dist = np.minimum.reduce([
        pt_seg(a1, a2, b2), pt_seg(b1, a2, b2),
        pt_seg(a2, a1, b1), pt_seg(b2, a1, b1),
    ])
    return np.where(crossing, 0.0, dist)


def _check_simple(rings, name):
    edges = np.vstack([ring_edges(r) for r in rings])
    ring_id = np.concatenate([np.full(len(r), k) for k, r in enumerate(rings)])
    local = np.concatenate([np.arange(len(r)) for r in rings])
    sizes = np.array([len(r) for r in rings])
    n = len(edges)
    block = max(1, 400_000 // n)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        dist = _segment_distance(edges[lo:hi], edges)
        ri, rj = ring_id[lo:hi, None], ring_id[None, :]
        li, lj = local[lo:hi, None], local[None, :]
        size = sizes[ring_id[lo:hi]][:, None]
        same = ri == rj
        adjacent = same & (((li + 1) % size == lj) | ((lj + 1) % size == li))
        self_pair = same & (li == lj)
        upper = np.arange(lo, hi)[:, None] < np.arange(n)[None, :]
        bad = upper & ~adjacent & ~self_pair & (dist <= EPS_GEOM)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise InvalidPolygonError(f"{name}: edges {lo + i} and {j} intersect (polygon is not simple)")
    # adjacent edges must not fold back onto each other
    for r in rings:
        prev = np.roll(r, 1, axis=0)
        nxt = np.roll(r, -1, axis=0)
        u, v = r - prev, nxt - r
        cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
        dot = (u * v).sum(1)
        span = np.maximum(np.hypot(*u.T), np.hypot(*v.T))
        fold = (np.abs(cross) <= EPS_GEOM * span) & (dot < 0)
        if fold.any():
            raise InvalidPolygonError(f"{name}: ring doubles back on itself at vertex {int(np.argmax(fold))}")


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon with optional holes.

    The exterior is stored counter-clockwise and holes clockwise regardless of
    the input orientation. Pass ``validate=False`` only for rings that are
    already known to be valid (e.g. the image of a valid polygon under an
    isometry).
    """

    exterior: np.ndarray
    holes: tuple = field(default=())

    def __init__(self, exterior, holes: Sequence = (), validate: bool = True):
        ext = _clean_ring(exterior, "exterior")
        hs = [_clean_ring(h, f"hole {k}") for k, h in enumerate(holes)]
        if ring_signed_area(ext) < 0:
            ext = ext[::-1]
        hs = [h[::-1] if ring_signed_area(h) > 0 else h for h in hs]
        ext = np.ascontiguousarray(ext)
        hs = tuple(np.ascontiguousarray(h) for h in hs)
        for arr in (ext, *hs):
            arr.setflags(write=False)
        object.__setattr__(self, "exterior", ext)
        object.__setattr__(self, "holes", hs)
        if validate:
            self._validate()

    def _validate(self):
        if ring_signed_area(self.exterior) <= 0:
            raise InvalidPolygonError("exterior has zero area")
        for k, h in enumerate(self.holes):
            if abs(ring_signed_area(h)) <= 0:
                raise InvalidPolygonError(f"hole {k} has zero area")
        _check_simple(self.rings, "polygon")
        ext_edges = ring_edges(self.exterior)
        for k, h in enumerate(self.holes):
            loc = kernels.classify_points(h, ext_edges, EPS_GEOM)
            if np.any(loc != kernels.INSIDE):
                raise InvalidPolygonError(f"hole {k} is not strictly inside the exterior")
            for j, other in enumerate(self.holes):
                if j != k and kernels.classify_points(h[:1], ring_edges(other), EPS_GEOM)[0] != kernels.OUTSIDE:
                    raise InvalidPolygonError(f"hole {k} lies inside hole {j}")

    @property
    def rings(self):
        return (self.exterior, *self.holes)

    @property
    def edges(self) -> np.ndarray:
        return np.vstack([ring_edges(r) for r in self.rings])

    @property
    def vertices(self) -> np.ndarray:
        return np.vstack(self.rings)

    @property
    def area(self) -> float:
        return signed_area(self)

    @property
    def bounds(self):
        v = self.exterior
        return (float(v[:, 0].min()), float(v[:, 1].min()), float(v[:, 0].max()), float(v[:, 1].max()))

    def __repr__(self):
        return f"Polygon({len(self.exterior)} vertices, {len(self.holes)} holes, area={self.area:.6g})"


@dataclass(frozen=True)
class RigidTransform:
    rotation: float = 0.0
    translation: Point2 = Point2(0.0, 0.0)

    def __post_init__(self):
        theta = math.remainder(float(self.rotation), 2 * math.pi)  # [-pi, pi]
        if theta <= -math.pi:
            theta += 2 * math.pi
        object.__setattr__(self, "rotation", theta)
        object.__setattr__(self, "translation", Point2(*map(float, self.translation)))

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return np.array([[c, -s], [s, c]])

    def apply_points(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return pts @ self.matrix.T + np.asarray(self.translation)


def signed_area(poly: Polygon) -> float:
    """Exterior area minus hole areas."""
    return ring_signed_area(poly.exterior) - sum(abs(ring_signed_area(h)) for h in poly.holes)


def convex_hull(points) -> Polygon:
    """Counter-clockwise convex hull (monotone chain); collinear points dropped."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise DegenerateGeometryError("convex hull needs at least 3 points")
    pts = np.unique(pts, axis=0)  # lexicographic sort as a side effect
    scale = max(1.0, float(np.abs(pts).max()))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    tol = 1e-12 * scale * scale

    # exact sign test: a tolerance here can pop a true extreme point when
    # x-coordinates differ only by round-off
    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and cross(chain[-2], chain[-1], p) <= 0.0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3 or ring_signed_area(hull) <= tol:
        raise DegenerateGeometryError("all points are collinear")
    return Polygon(hull, validate=False)


def point_in_polygon(p, poly: Polygon, eps: float = EPS_GEOM) -> Location:
    """Even-odd classification; points within ``eps`` of an edge are BOUNDARY."""
    return Location(int(kernels.classify_points(np.asarray(p, dtype=float), poly.edges, eps)[0]))


def locate_points(points, polys, eps: float = EPS_GEOM) -> np.ndarray:
    """Vectorised classification against a region made of one or more polygons."""
    return kernels.classify_points(points, region_edges(polys), eps)


class Intersection(NamedTuple):
    """Result of :func:`segment_intersect`.

    ``t`` and ``s`` are parameters along the first and second segment. For an
    ``overlap`` the fields describe the first overlap endpoint and ``end``
    holds the second one.
    """

    kind: str  # "point" or "overlap"
    t: float
    s: float
    point: Point2
    end: Point2 | None = None


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def segment_intersect(s1, s2, eps: float = EPS_GEOM) -> Intersection | None:
    """Intersect two segments given as ``((x0, y0), (x1, y1))``.

    Returns ``None`` when they do not meet (including parallel, disjoint
    segments).
    """
    p, q = (np.asarray(v, dtype=float) for v in s1)
    a, b = (np.asarray(v, dtype=float) for v in s2)
    d, e = q - p, b - a
    ld, le = math.hypot(*d), math.hypot(*e)
    if ld <= eps or le <= eps:
        raise DegenerateGeometryError("segment has zero length")
    w = a - p
    den = _cross(d, e)
    if abs(den) > 1e-14 * ld * le:
        t = _cross(w, e) / den
        s = _cross(w, d) / den
        if -eps / ld <= t <= 1 + eps / ld and -eps / le <= s <= 1 + eps / le:
            t, s = min(max(t, 0.0), 1.0), min(max(s, 0.0), 1.0)
            # average both parametrisations so swapping arguments is exact
            pt = 0.5 * ((p + t * d) + (a + s * e))
            return Intersection("point", float(t), float(s), Point2(*map(float, pt)))
        return None
    if abs(_cross(w, d)) / ld > eps:
        return None  # parallel, disjoint lines
    # collinear: overlap interval along the first segment
    ta = float(np.dot(w, d) / (ld * ld))
    tb = float(np.dot(b - p, d) / (ld * ld))
    lo, hi = max(0.0, min(ta, tb)), min(1.0, max(ta, tb))
    if hi < lo - eps / ld:
        return None
    hi = max(hi, lo)

    def s_of(pt):
        return float(np.dot(pt - a, e) / (le * le))

    p0, p1 = p + lo * d, p + hi * d
    if (hi - lo) * ld <= eps:
        return Intersection("point", lo, s_of(p0), Point2(*map(float, p0)))
    return Intersection("overlap", lo, s_of(p0), Point2(*map(float, p0)), Point2(*map(float, p1)))


def apply_transform(poly: Polygon, T: RigidTransform) -> Polygon:
    """Image of a polygon under a rigid motion."""
    return Polygon(T.apply_points(poly.exterior), [T.apply_points(h) for h in poly.holes], validate=False)


def region_edges(polys) -> np.ndarray:
    """Stacked edges of every ring of every polygon in a region."""
    if isinstance(polys, Polygon):
        return polys.edges
    polys = list(polys)
    if not polys:
        return np.zeros((0, 4))
    return np.vstack([p.edges for p in polys])


def region_vertices(polys) -> np.ndarray:
    if isinstance(polys, Polygon):
        return polys.vertices
    return np.vstack([p.vertices for p in polys])


def region_area(polys) -> float:
    if isinstance(polys, Polygon):
        return polys.area
    return float(sum(p.area for p in polys))
