"""Per-robot paths: boustrophedon traversal of allocated swaths plus obstacle detours."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnreachableError
from .geom import EPS_GEOM
from .visgraph import shortest_path

SWATH, TRANSITION, DETOUR, DEPOT = "swath", "transition", "detour", "depot"


@dataclass(frozen=True)
class Leg:
    kind: str  # swath | transition | detour
    start: int  # waypoint index
    end: int
    length: float
    swath_id: int | None = None
    depot_leg: bool = False


@dataclass(frozen=True, eq=False)
class CoveragePlan:
    robot_id: int
    waypoints: np.ndarray
    legs: tuple
    headings: dict = field(default_factory=dict)  # swath id -> +1 (a->b) or -1 (b->a)
    tour: tuple = ()

    @property
    def length(self) -> float:
        return float(sum(leg.length for leg in self.legs))

    @property
    def swath_length(self) -> float:
        return float(sum(leg.length for leg in self.legs if leg.kind == SWATH))

    @property
    def depot_length(self) -> float:
        return float(sum(leg.length for leg in self.legs if leg.depot_leg))

    @property
    def coverage_length(self) -> float:
        return self.length - self.depot_length

    def coverage_span(self):
        """Waypoint index range from first swath entry to last swath exit."""
        sw = [leg for leg in self.legs if leg.kind == SWATH]
        if not sw:
            return None
        return sw[0].start, sw[-1].end

    def coverage_waypoints(self) -> np.ndarray:
        span = self.coverage_span()
        if span is None:
            return self.waypoints[:0]
        return self.waypoints[span[0]: span[1] + 1]

    def leg_points(self, leg: Leg) -> np.ndarray:
        return self.waypoints[leg.start: leg.end + 1]

    def traversed_swaths(self):
        return [leg.swath_id for leg in self.legs if leg.kind == SWATH]


def alternating_waypoints(tour, depot=None, dist=None):
    """Entry/exit points for an ordered list of swaths.

    The first swath is entered from the endpoint nearer to ``depot``. After
    that the heading flips for every new sweep line and is kept when the next
    swath continues the same line. Returns ``[(entry, exit, heading), ...]``
    with heading +1 for a->b.
    """
    if not tour:
        return []
    dist = dist or (lambda p, q: math.hypot(p[0] - q[0], p[1] - q[1]))
    out = []
    heading = 1
    for i, sw in enumerate(tour):
        if i == 0:
            if depot is not None and dist(depot, sw.b) < dist(depot, sw.a):
                heading = -1
        elif sw.line_index != tour[i - 1].line_index:
            heading = -heading
        entry, exit_ = (sw.a, sw.b) if heading > 0 else (sw.b, sw.a)
        out.append((np.asarray(entry, dtype=float), np.asarray(exit_, dtype=float), heading))
    return out


class _Builder:
    def __init__(self, start):
        self.points = [np.asarray(start, dtype=float)]
        self.legs = []

    def add(self, pts, kind, swath_id=None, depot_leg=False):
        pts = np.asarray(pts, dtype=float)
        start = len(self.points) - 1
        for p in pts[1:]:
            if math.hypot(*(p - self.points[-1])) > EPS_GEOM:
                self.points.append(p)
        end = len(self.points) - 1
        if end == start:
            return
        length = float(np.hypot(*np.diff(np.array(self.points[start:end + 1]), axis=0).T).sum())
        self.legs.append(Leg(kind, start, end, length, swath_id, depot_leg))


def _connect(builder, g, p, q, depot_leg=False, label=""):
    if math.hypot(*(np.asarray(q) - np.asarray(p))) <= EPS_GEOM:
        return
    if g.visible(p, q):
        builder.add([p, q], TRANSITION, depot_leg=depot_leg)
        return
    try:
        path, _ = shortest_path(g, p, q)
    except UnreachableError as exc:
        raise UnreachableError(f"no collision-free transition {label}: {exc}") from exc
    builder.add(path, DETOUR, depot_leg=depot_leg)


def vg_refine(traversal, g, ws=None, depot=None, robot_id=0, swath_ids=None) -> CoveragePlan:
    """Join swath traversals with straight or visibility-graph transitions.

    ``traversal`` is the output of :func:`alternating_waypoints`. Swath legs
    are kept verbatim; blocked transitions (including depot legs when a
    depot is given) are replaced by graph shortest paths.
    """
    ids = list(swath_ids) if swath_ids is not None else list(range(len(traversal)))
    if not traversal:
        start = depot if depot is not None else (0.0, 0.0)
        return CoveragePlan(robot_id, np.asarray([start], dtype=float), (), {}, tuple(ids))
    first_entry = traversal[0][0]
    builder = _Builder(depot if depot is not None else first_entry)
    if depot is not None:
        _connect(builder, g, depot, first_entry, depot_leg=True, label=f"depot -> swath {ids[0]}")
    headings = {}
    for k, (entry, exit_, heading) in enumerate(traversal):
        if k > 0:
            _connect(builder, g, traversal[k - 1][1], entry, label=f"swath {ids[k - 1]} -> swath {ids[k]}")
        builder.add([entry, exit_], SWATH, swath_id=ids[k])
        headings[ids[k]] = heading
    if depot is not None:
        _connect(builder, g, traversal[-1][1], depot, depot_leg=True, label=f"swath {ids[-1]} -> depot")
    return CoveragePlan(robot_id, np.array(builder.points), tuple(builder.legs), headings, tuple(ids))


def assemble_plans(alloc, swaths, g, ws, depot) -> list[CoveragePlan]:
    """One closed depot-to-depot plan per robot."""
    depot = np.asarray(depot, dtype=float)

    def dist(p, q):
        from .visgraph import transition_distance
        return transition_distance(g, p, q)

    plans = []
    for r, tour in enumerate(alloc.tours):
        sw = [swaths[m] for m in tour]
        trav = alternating_waypoints(sw, depot, dist)
        plans.append(vg_refine(trav, g, ws, depot, robot_id=r, swath_ids=[s.id for s in sw]))
    return plans


def sample_polyline(points, step: float = 0.1) -> np.ndarray:
    """Points along a polyline no more than ``step`` apart, vertices included."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return pts.copy()
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(math.ceil(math.hypot(*(b - a)) / step)))
        f = np.arange(1, n + 1)[:, None] / n
        out.append(a + f * (b - a))
    return np.vstack(out)


def heading_changes(points, threshold_deg: float = 5.0) -> int:
    """Interior polyline vertices where the direction turns by more than the threshold."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        return 0
    d = np.diff(pts, axis=0)
    keep = np.hypot(d[:, 0], d[:, 1]) > EPS_GEOM
    d = d[keep]
    if len(d) < 2:
        return 0
    ang = np.arctan2(d[:, 1], d[:, 0])
    turn = np.abs((np.diff(ang) + np.pi) % (2 * np.pi) - np.pi)
    return int(np.count_nonzero(turn > math.radians(threshold_deg)))
