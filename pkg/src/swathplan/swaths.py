"""Parallel swath generation inside the feasible space."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyPlanError
from .geom import EPS_GEOM, Point2, region_edges, region_vertices
from .orientation import SweepFrame


def min_swath_length(w: float) -> float:
    return max(0.1, 0.05 * w)


@dataclass(frozen=True)
class Swath:
    id: int
    a: Point2
    b: Point2
    line_index: int
    segment_index: int
    length: float
    z: float

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.a) + np.asarray(self.b))

    def endpoints(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=float)


@dataclass(frozen=True)
class SwathSet:
    swaths: tuple
    frame: SweepFrame
    width: float
    eta_min: float
    eta_max: float
    n_lines: int

    def __len__(self):
        return len(self.swaths)

    def __iter__(self):
        return iter(self.swaths)

    def __getitem__(self, k):
        return self.swaths[k]

    @property
    def total_length(self) -> float:
        return float(sum(s.length for s in self.swaths))

    def as_segments(self) -> np.ndarray:
        return np.array([[*s.a, *s.b] for s in self.swaths], dtype=float).reshape(-1, 4)


def projection_span(region, v) -> tuple[float, float]:
    """Min and max of ``p . v`` over every vertex of every ring."""
    proj = region_vertices(region) @ np.asarray(v, dtype=float)
    return float(proj.min()), float(proj.max())


def swath_line_centers(eta_min: float, eta_max: float, w: float, centered: bool = False) -> list[float]:
    """Offsets ``eta_min + (k - 1/2) w`` for ``k = 1 .. ceil(span / w)``.

    With ``centered`` the same comb is shifted so both outer lines sit equally
    far inside the span; spacing stays exactly ``w``.
    """
    if w <= 0:
        raise ValueError("swath width must be positive")
    span = eta_max - eta_min
    if span <= EPS_GEOM:
        return [eta_min]
    n = max(1, math.ceil(span / w - 1e-9))
    start = eta_min + 0.5 * (span - (n - 1) * w) if centered else eta_min + 0.5 * w
    return [start + (k - 1) * w for k in range(1, n + 1)]


def needs_centering(eta_min: float, eta_max: float, w: float) -> bool:
    """True when the anchored comb puts its last line on or past ``eta_max``.

    That line would miss the region and leave the far strip uncovered.
    """
    centers = swath_line_centers(eta_min, eta_max, w)
    return len(centers) > 1 and centers[-1] >= eta_max - EPS_GEOM


def line_edge_hits(center: float, frame: SweepFrame, edges: np.ndarray):
    """Parameters ``(t, s)`` where the line ``center*v + t*u`` meets each edge.

    Parallel edges are dropped; the remaining rows give ``t`` along the line
    and ``s`` along the edge.
    """
    u, v = frame.u, frame.v
    origin = center * v
    a, b = edges[:, :2], edges[:, 2:]
    e = b - a
    w = a - origin
    den = u[0] * e[:, 1] - u[1] * e[:, 0]
    elen = np.hypot(e[:, 0], e[:, 1])
    ok = np.abs(den) > 1e-12 * elen
    den = np.where(ok, den, 1.0)
    t = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / den
    s = (w[:, 0] * u[1] - w[:, 1] * u[0]) / den
    return t[ok], s[ok], elen[ok]


def clip_line_to_region(center: float, frame: SweepFrame, region, w: float | None = None,
                        min_length: float | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Interior pieces of one sweep line, as ``(a, b)`` pairs ordered along ``u``.

    Candidate pieces join consecutive boundary crossings; a piece is kept when
    its midpoint is inside (or on the boundary of) the region and it is longer
    than ``min_length``. Kept pieces that touch end to end are merged.
    """
    edges = region if isinstance(region, np.ndarray) else region_edges(region)
    if min_length is None:
        min_length = min_swath_length(w) if w else 0.0
    t, s, elen = line_edge_hits(center, frame, edges)
    tol = EPS_GEOM / elen
    keep = (s >= -tol) & (s <= 1 + tol)
    ts = np.sort(t[keep])
    if len(ts) < 2:
        return []
    origin = center * frame.v
    mids_t = 0.5 * (ts[:-1] + ts[1:])
    mids = origin + mids_t[:, None] * frame.u
    inside = kernels.classify_points(mids, edges, EPS_GEOM) != kernels.OUTSIDE
    pieces = []
    for k in np.flatnonzero(inside & (ts[1:] - ts[:-1] > EPS_GEOM)):
        lo, hi = ts[k], ts[k + 1]
        if pieces and abs(lo - pieces[-1][1]) <= EPS_GEOM:
            pieces[-1][1] = hi
        else:
            pieces.append([lo, hi])
    return [(origin + lo * frame.u, origin + hi * frame.u) for lo, hi in pieces if hi - lo > min_length]


def generate_swaths(ws, frame: SweepFrame, w: float, centered: bool | None = None) -> SwathSet:
    """All valid swaths across the feasible space, ordered by ``z`` then along ``u``.

    ``centered=None`` anchors the first line at ``eta_min + w/2`` unless that
    would push the last line out of the span (see :func:`needs_centering`).
    """
    if w <= 0:
        raise ValueError("swath width must be positive")
    region = ws.feasible if hasattr(ws, "feasible") else ws
    edges = region_edges(region)
    eta_min, eta_max = projection_span(region, frame.v)
    if centered is None:
        centered = needs_centering(eta_min, eta_max, w)
    centers = swath_line_centers(eta_min, eta_max, w, centered)
    raw = []
    for k, c in enumerate(centers):
        for nu, (a, b) in enumerate(clip_line_to_region(c, frame, edges, w)):
            raw.append((k, nu, a, b))
    if not raw:
        raise EmptyPlanError(f"no swath of width {w:g} m fits in the feasible space", step="swath generation")
    ends = np.array([[*a, *b] for _, _, a, b in raw])
    loc = kernels.classify_points(np.vstack([ends[:, :2], ends[:, 2:]]), edges, EPS_GEOM)
    assert np.all(loc != kernels.OUTSIDE), "swath endpoint left the feasible space"

    # line index is monotone in z and immune to rounding noise in m . v
    def key(item):
        k, _, a, b = item
        return (k, float(0.5 * (a + b) @ frame.u))

    raw.sort(key=key)
    swaths = []
    for i, (k, nu, a, b) in enumerate(raw):
        m = 0.5 * (a + b)
        swaths.append(Swath(i, Point2(float(a[0]), float(a[1])), Point2(float(b[0]), float(b[1])), k, nu,
                            float(np.hypot(*(b - a))), float(m @ frame.v)))
    return SwathSet(tuple(swaths), frame, float(w), eta_min, eta_max, len(centers))
