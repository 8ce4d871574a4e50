"""Plan evaluation: lengths, turns, surrogate energy, makespan, balance and coverage."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .geom import EPS_GEOM
from .routing import SWATH, heading_changes

TURN_THRESHOLD_DEG = 5.0
MAX_GRID_CELLS = 6_000_000


@dataclass(frozen=True)
class EnergyModel:
    """Constant-speed surrogate: cruise power over time plus a fixed cost per turn."""

    cruise_speed: float = 5.0  # m/s
    cruise_power: float = 350.0  # W
    turn_penalty: float = 0.2  # Wh per turn
    turn_time: float = 3.0  # s per turn

    def __post_init__(self):
        for name in ("cruise_speed", "cruise_power", "turn_penalty", "turn_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"energy model parameter {name} must be positive")

    def energy(self, length_m: float, turns: int) -> float:
        return self.cruise_power * (length_m / self.cruise_speed) / 3600.0 + turns * self.turn_penalty

    def duration(self, length_m: float, turns: int) -> float:
        return length_m / self.cruise_speed + turns * self.turn_time


@dataclass(frozen=True)
class RobotMetrics:
    robot_id: int
    n_swaths: int
    length_km: float
    swath_length_km: float
    transition_length_km: float  # transitions and detours between swaths
    depot_length_km: float
    turns: int  # between first entry and last exit
    total_turns: int  # including depot junctions
    energy_wh: float
    coverage_energy_wh: float
    duration_s: float


@dataclass(frozen=True)
class MetricsReport:
    robots: tuple
    total_length_km: float
    coverage_length_km: float
    total_energy_wh: float
    coverage_energy_wh: float
    makespan_s: float
    balance_ratio: float
    coverage_fraction: float
    n_swaths: int
    model: EnergyModel = field(default_factory=EnergyModel)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["robots"] = [asdict(r) for r in self.robots]
        return d

    def table(self) -> str:
        head = f"{'robot':>5} {'swaths':>6} {'len km':>9} {'turns':>6} {'E Wh':>9} {'time s':>9}"
        rows = [head]
        for r in self.robots:
            rows.append(f"{r.robot_id:>5} {r.n_swaths:>6} {r.length_km:>9.3f} {r.total_turns:>6} "
                        f"{r.energy_wh:>9.2f} {r.duration_s:>9.1f}")
        rows.append(f"total length {self.total_length_km:.3f} km (coverage only {self.coverage_length_km:.3f} km)")
        rows.append(f"fleet energy {self.total_energy_wh:.2f} Wh (coverage only {self.coverage_energy_wh:.2f} Wh)")
        rows.append(f"makespan {self.makespan_s:.1f} s, balance {self.balance_ratio:.3f}, "
                    f"coverage {100 * self.coverage_fraction:.2f}%")
        return "\n".join(rows)


def _robot_metrics(plan, model: EnergyModel, threshold: float) -> RobotMetrics:
    sw = [leg for leg in plan.legs if leg.kind == SWATH]
    length = plan.length
    swath_len = plan.swath_length
    depot_len = plan.depot_length
    turns = heading_changes(plan.coverage_waypoints(), threshold)
    total_turns = heading_changes(plan.waypoints, threshold)
    # a closed tour turns at the depot too, but it starts and ends there at rest
    cov_len = length - depot_len
    return RobotMetrics(
        robot_id=int(plan.robot_id),
        n_swaths=len(sw),
        length_km=length / 1000.0,
        swath_length_km=swath_len / 1000.0,
        transition_length_km=(cov_len - swath_len) / 1000.0,
        depot_length_km=depot_len / 1000.0,
        turns=turns,
        total_turns=total_turns,
        energy_wh=model.energy(length, total_turns),
        coverage_energy_wh=model.energy(cov_len, turns),
        duration_s=model.duration(length, total_turns),
    )


def coverage_segments(plans) -> np.ndarray:
    """Segments (n, 4) travelled while covering: swaths and inter-swath transitions."""
    segs = []
    for plan in plans:
        for leg in plan.legs:
            if leg.depot_leg:
                continue
            pts = plan.leg_points(leg)
            segs.append(np.hstack([pts[:-1], pts[1:]]))
    return np.vstack(segs) if segs else np.zeros((0, 4))


def coverage_grid(ws, cell: float, margin: float):
    """Cell centres of a regular grid that lie at least ``margin`` inside the feasible space."""
    lo = np.min([p.bounds[:2] for p in ws.feasible], axis=0)
    hi = np.max([p.bounds[2:] for p in ws.feasible], axis=0)
    nx = max(1, int(math.ceil((hi[0] - lo[0]) / cell)))
    ny = max(1, int(math.ceil((hi[1] - lo[1]) / cell)))
    if nx * ny > MAX_GRID_CELLS:
        cell *= math.sqrt(nx * ny / MAX_GRID_CELLS)
        nx = max(1, int(math.ceil((hi[0] - lo[0]) / cell)))
        ny = max(1, int(math.ceil((hi[1] - lo[1]) / cell)))
    xs = lo[0] + (np.arange(nx) + 0.5) * cell
    ys = lo[1] + (np.arange(ny) + 0.5) * cell
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    edges = ws.edges
    inside = kernels.classify_points(pts, edges, EPS_GEOM) == kernels.INSIDE
    pts = pts[inside]
    if margin > 0 and len(pts):
        pts = pts[kernels.min_distance(pts, edges) >= margin]
    return pts, cell


def coverage_fraction(plans, ws, w: float, resolution: float = 20.0, margin_frac: float = 0.05) -> float:
    """Share of grid cells of the feasible space within ``w/2`` of a coverage segment.

    Cells closer than ``margin_frac * w`` to the boundary are skipped so a
    boundary-hugging grid does not count arc-approximation slivers.
    """
    pts, _ = coverage_grid(ws, w / resolution, margin_frac * w)
    if len(pts) == 0:
        return 1.0
    segs = coverage_segments(plans)
    if len(segs) == 0:
        return 0.0
    covered = kernels.covered_mask(pts, segs, 0.5 * w + EPS_GEOM)
    return float(np.count_nonzero(covered)) / len(pts)


def evaluate(plans, ws=None, swaths=None, model: EnergyModel | None = None,
             threshold_deg: float = TURN_THRESHOLD_DEG, with_coverage: bool = True) -> MetricsReport:
    """Fleet and per-robot metrics for a list of :class:`CoveragePlan`."""
    model = model or EnergyModel()
    robots = tuple(_robot_metrics(p, model, threshold_deg) for p in plans)
    lengths = np.array([r.length_km for r in robots])
    total = float(lengths.sum()) if len(robots) else 0.0
    mean = total / len(robots) if robots else 0.0
    balance = float(lengths.max() / mean) if mean > 0 else 0.0
    n_sw = sum(r.n_swaths for r in robots)
    cov = 0.0
    if with_coverage and ws is not None and swaths is not None and n_sw:
        cov = coverage_fraction(plans, ws, swaths.width)
    return MetricsReport(
        robots=robots,
        total_length_km=total,
        coverage_length_km=float(sum(r.length_km - r.depot_length_km for r in robots)),
        total_energy_wh=float(sum(r.energy_wh for r in robots)),
        coverage_energy_wh=float(sum(r.coverage_energy_wh for r in robots)),
        makespan_s=float(max((r.duration_s for r in robots), default=0.0)),
        balance_ratio=balance,
        coverage_fraction=cov,
        n_swaths=n_sw,
        model=model,
    )


def compare_runs(reports) -> list[dict]:
    """Rank labelled reports by fleet energy.

    ``reports`` is a sequence of ``(label, MetricsReport)`` pairs. Each row
    carries the percent difference in energy and length against the best run.
    """
    rows = sorted(reports, key=lambda lr: (lr[1].total_energy_wh, lr[1].total_length_km, str(lr[0])))
    if not rows:
        return []
    best = rows[0][1]

    def pct(x, ref):
        return 0.0 if ref == 0 else 100.0 * (x - ref) / ref

    out = []
    for rank, (label, rep) in enumerate(rows, 1):
        out.append({
            "rank": rank,
            "label": label,
            "total_energy_wh": rep.total_energy_wh,
            "total_length_km": rep.total_length_km,
            "coverage_energy_wh": rep.coverage_energy_wh,
            "makespan_s": rep.makespan_s,
            "delta_energy_pct": pct(rep.total_energy_wh, best.total_energy_wh),
            "delta_length_pct": pct(rep.total_length_km, best.total_length_km),
        })
    return out
