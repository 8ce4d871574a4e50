"""Buffered feasible space: inward-offset field minus inflated exclusion zones.

Offsets are built directly as Minkowski operations with a disk: the band
swept by a disk along every boundary edge is the union of one exact
rectangle per edge plus a disk polygon at each vertex where the band bulges.
Disks are circumscribed polygons, so dilations only ever over-cover and
erosions only ever under-cover; the excess is bounded by the chord error.
Shapely performs the set algebra (union, difference, intersection).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import shapely
from shapely import geometry as sg

from . import kernels
from .errors import InfeasibleWorkspaceError, InvalidPolygonError
from .geom import EPS_GEOM, Polygon, region_area, region_edges, ring_signed_area

MIN_COMPONENT_AREA = 1e-6  # m^2; smaller shapely output is numerical debris


def chord_error(h: float) -> float:
    """Allowed deviation of an arc approximation for offset distance ``h``."""
    return min(h / 50.0, 0.01)


def disk_sides(h: float) -> int:
    """Sides of a circumscribed regular polygon within ``chord_error(h)`` of the disk."""
    if h <= 0:
        return 8
    err = chord_error(h)
    half = math.acos(h / (h + err))
    return max(8, int(math.ceil(math.pi / half)))


def _disk(center, h, sides, phase=0.0):
    # phase ties the facets to the local edge direction, so offsets commute with rotations
    k = np.arange(sides)
    r = h / math.cos(math.pi / sides)
    ang = phase + 2 * math.pi * k / sides
    return sg.Polygon(np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)]))


def _band(poly: Polygon, h: float, convex_side: bool):
    """Union of disk-swept edge strips.

    With ``convex_side`` disks sit at convex vertices (outward growth);
    otherwise at reflex vertices (inward erosion).
    """
    sides = disk_sides(h)
    parts = []
    for ring in poly.rings:
        nxt = np.roll(ring, -1, axis=0)
        prev = np.roll(ring, 1, axis=0)
        d = nxt - ring
        lens = np.hypot(d[:, 0], d[:, 1])
        nrm = np.column_stack([-d[:, 1], d[:, 0]]) / lens[:, None] * h
        for a, b, n in zip(ring, nxt, nrm):
            parts.append(sg.Polygon([a + n, b + n, b - n, a - n]))
        turn = (ring - prev)[:, 0] * d[:, 1] - (ring - prev)[:, 1] * d[:, 0]
        pick = turn > 0 if convex_side else turn < 0
        phase = np.arctan2(nrm[:, 1], nrm[:, 0])
        parts.extend(_disk(p, h, sides, ph) for p, ph in zip(ring[pick], phase[pick]))
    return shapely.unary_union(parts)


def to_shapely(poly: Polygon) -> sg.Polygon:
    return sg.Polygon(poly.exterior, [h for h in poly.holes])


def _clean(coords):
    r = np.asarray(coords, dtype=float)[:-1]
    # drop vertices that sit on the chord of their neighbours
    changed = True
    while changed and len(r) > 3:
        prev, nxt = np.roll(r, 1, axis=0), np.roll(r, -1, axis=0)
        chord = nxt - prev
        clen = np.hypot(chord[:, 0], chord[:, 1])
        dev = np.abs(chord[:, 0] * (r - prev)[:, 1] - chord[:, 1] * (r - prev)[:, 0]) / np.maximum(clen, 1e-300)
        short = np.hypot(*(r - prev).T) <= EPS_GEOM
        drop = (dev <= EPS_GEOM) | short
        if not drop.any():
            break
        # never remove two neighbours in one pass
        idx = np.flatnonzero(drop)
        keep = np.ones(len(r), dtype=bool)
        last = -2
        for i in idx:
            if i != last + 1:
                keep[i] = False
                last = i
        if keep.all():
            break
        r = r[keep]
    return r


def from_shapely(geom, min_area: float = MIN_COMPONENT_AREA) -> list[Polygon]:
    """Convert shapely output into validated polygons sorted by descending area."""
    if geom is None or geom.is_empty:
        return []
    polys = [g for g in getattr(geom, "geoms", [geom]) if isinstance(g, sg.Polygon)]
    out = []
    for g in polys:
        if g.area <= min_area:
            continue
        ext = _clean(g.exterior.coords)
        holes = [_clean(r.coords) for r in g.interiors if abs(sg.Polygon(r).area) > min_area]
        holes = [h for h in holes if len(h) >= 3 and abs(ring_signed_area(h)) > min_area]
        if len(ext) < 3 or abs(ring_signed_area(ext)) <= min_area:
            continue
        out.append(Polygon(ext, holes))
    out.sort(key=lambda p: (-p.area, p.bounds))
    return out


def offset_inward(poly: Polygon, h: float) -> list[Polygon]:
    """Erosion ``poly (-) B_h``; possibly empty or split into several components."""
    if h < 0:
        raise ValueError("offset distance must be non-negative")
    if h == 0:
        return [poly]
    return from_shapely(to_shapely(poly).difference(_band(poly, h, convex_side=False)))


def offset_outward(poly: Polygon, h: float) -> Polygon:
    """Dilation ``poly (+) B_h``."""
    if h < 0:
        raise ValueError("offset distance must be non-negative")
    if h == 0:
        return poly
    grown = from_shapely(shapely.unary_union([to_shapely(poly), _band(poly, h, convex_side=True)]))
    if len(grown) != 1:
        raise InvalidPolygonError("dilation of a connected polygon produced several components")
    return grown[0]


@dataclass(frozen=True, eq=False)
class Workspace:
    """Field, exclusion zones, headland width and the resulting feasible space."""

    roi: Polygon
    obstacles: tuple
    headland: float
    feasible: tuple
    buffer_scale: float | None = None
    inflated: tuple = field(default=())

    @cached_property
    def edges(self) -> np.ndarray:
        return region_edges(self.feasible)

    @property
    def area(self) -> float:
        return region_area(self.feasible)

    def locate(self, points) -> np.ndarray:
        return kernels.classify_points(points, self.edges, EPS_GEOM)

    def contains(self, points) -> np.ndarray:
        """True for points in the closure of the feasible space."""
        return self.locate(points) != kernels.OUTSIDE

    def segment_inside(self, p, q) -> bool:
        return bool(kernels.segments_inside([p], [q], self.edges, EPS_GEOM)[0])

    def component_of(self, points) -> np.ndarray:
        """Index of the feasible component holding each point (-1 if none)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        out = np.full(len(pts), -1)
        for k, comp in enumerate(self.feasible):
            hit = (kernels.classify_points(pts, comp.edges, EPS_GEOM) != kernels.OUTSIDE) & (out < 0)
            out[hit] = k
        return out

    def nearest_feasible(self, p) -> np.ndarray:
        """``p`` itself when feasible, otherwise its projection onto the boundary."""
        p = np.asarray(p, dtype=float)
        if self.contains(p)[0]:
            return p
        e = self.edges
        a, d = e[:, :2], e[:, 2:] - e[:, :2]
        ll = (d * d).sum(1)
        u = np.clip(((p - a) * d).sum(1) / ll, 0.0, 1.0)
        q = a + u[:, None] * d
        k = int(np.argmin(np.hypot(*(q - p).T)))
        return q[k]

    @property
    def centroid(self) -> np.ndarray:
        c = shapely.unary_union([to_shapely(p) for p in self.feasible]).centroid
        return np.array([c.x, c.y])


def build_feasible(roi: Polygon, obstacles=(), h: float = 0.0, buffer_scale: float | None = None) -> Workspace:
    """Feasible space ``(roi (-) B_h) minus the union of (o_i (+) B_h)``.

    Obstacles are clipped to the field before inflation. Raises
    :class:`InfeasibleWorkspaceError` naming the step that emptied the space.
    """
    if h < 0:
        raise ValueError("headland width must be non-negative")
    inner = offset_inward(roi, h)
    if not inner:
        raise InfeasibleWorkspaceError(f"inward offset by {h:g} m leaves no space inside the field",
                                       step="inward offset")
    roi_s = to_shapely(roi)
    inflated = []
    for ob in obstacles:
        clipped = from_shapely(to_shapely(ob).intersection(roi_s))
        inflated.extend(offset_outward(part, h) for part in clipped)
    if inflated:
        blocked = shapely.unary_union([to_shapely(p) for p in inflated])
        feasible = from_shapely(shapely.unary_union([to_shapely(p) for p in inner]).difference(blocked))
    else:
        feasible = inner
    if not feasible:
        raise InfeasibleWorkspaceError("inflated exclusion zones cover the whole field",
                                       step="obstacle removal")
    return Workspace(roi, tuple(obstacles), float(h), tuple(feasible), buffer_scale, tuple(inflated))
