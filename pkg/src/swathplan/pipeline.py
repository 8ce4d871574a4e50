"""End-to-end planning run and parameter sweeps."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .allocation import build_cost_matrix, solve_mtsp
from .errors import PlanningError
from .metrics import EnergyModel, compare_runs, evaluate
from .orientation import compute_frame
from .routing import assemble_plans
from .swaths import generate_swaths
from .visgraph import build_graph
from .workspace import build_feasible

log = logging.getLogger(__name__)

STAGES = ("workspace", "orientation", "swathgen", "visgraph", "allocation", "routing", "metrics")
SWEEP_AXES = {"orientation": "orientation", "buffer": "buffer_scale", "buffer_scale": "buffer_scale",
              "robots": "n_robots", "n_robots": "n_robots"}
DEFAULT_SWEEPS = {
    "orientation": ["mar", "scan", "pca", "minwidth"],
    "buffer_scale": [0.0, 0.25, 0.5, 0.75, 1.0],
    "n_robots": [4, 6, 8, 10],
}


@dataclass
class PlanResult:
    scenario: object
    workspace: object
    frame: object
    swaths: object
    graph: object
    allocation: object
    plans: list
    report: object
    depot: np.ndarray
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def total_time(self) -> float:
        return float(sum(self.timings.values()))


@contextmanager
def _stage(name, timings):
    t0 = time.perf_counter()
    try:
        yield
    except PlanningError as exc:
        raise exc.with_stage(name)
    finally:
        timings[name] = time.perf_counter() - t0


def choose_depot(ws, requested=None, warnings=None):
    """Requested depot (projected into the feasible space) or the feasible-space centroid."""
    p = ws.centroid if requested is None else np.asarray(requested, dtype=float)
    q = ws.nearest_feasible(p)
    if requested is not None and np.hypot(*(q - p)) > 0 and warnings is not None:
        warnings.append(f"depot {tuple(map(float, p))} outside the feasible space; moved to "
                        f"({q[0]:.3f}, {q[1]:.3f})")
    return np.asarray(q, dtype=float)


def run_pipeline(sc, model: EnergyModel | None = None, with_coverage: bool = True) -> PlanResult:
    """Workspace, orientation, swaths, graph, allocation, routing and metrics for one scenario."""
    timings = {}
    warnings = list(sc.warnings)
    w = sc.swath_width
    model = model or EnergyModel(**sc.energy_model)
    with _stage("workspace", timings):
        ws = build_feasible(sc.roi, sc.obstacles, sc.headland, sc.buffer_scale)
        depot = choose_depot(ws, sc.depot, warnings)
    with _stage("orientation", timings):
        frame = compute_frame(sc.roi, sc.orientation)
    with _stage("swathgen", timings):
        swaths = generate_swaths(ws, frame, w)
    with _stage("visgraph", timings):
        extra = np.vstack([swaths.as_segments().reshape(-1, 2), depot[None, :]])
        graph = build_graph(ws, extra, sc.vg_spacing or w)
    with _stage("allocation", timings):
        inst = build_cost_matrix(swaths, graph, depot, sc.n_robots)
        alloc = solve_mtsp(inst, seed=sc.seed)
        warnings.extend(alloc.warnings)
    with _stage("routing", timings):
        plans = assemble_plans(alloc, swaths, graph, ws, depot)
    with _stage("metrics", timings):
        report = evaluate(plans, ws, swaths, model, with_coverage=with_coverage)
    return PlanResult(sc, ws, frame, swaths, graph, alloc, plans, report, depot, timings, warnings)


@dataclass
class SweepResult:
    axis: str
    rows: list  # one dict per value, in input order
    ranking: list  # compare_runs output over successful runs

    def csv_rows(self):
        rank = {r["label"]: r for r in self.ranking}
        out = []
        for row in self.rows:
            r = rank.get(row["label"], {})
            out.append({**row, "rank": r.get("rank", ""), "delta_energy_pct": r.get("delta_energy_pct", ""),
                        "delta_length_pct": r.get("delta_length_pct", "")})
        return out


SWEEP_FIELDS = ["axis", "value", "label", "status", "error", "n_swaths", "total_length_km", "coverage_length_km",
                "total_energy_wh", "coverage_energy_wh", "makespan_s", "balance_ratio", "coverage_fraction",
                "time_s", "rank", "delta_energy_pct", "delta_length_pct"]


def _coerce(axis, value):
    if axis == "n_robots":
        return int(value)
    if axis == "buffer_scale":
        return float(value)
    return str(value)


def sweep(sc, axis: str, values=None, model: EnergyModel | None = None, with_coverage: bool = True) -> SweepResult:
    """Run the pipeline once per value of ``axis``; failures are recorded, not raised."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from orientation, buffer, robots")
    field_name = SWEEP_AXES[axis]
    values = DEFAULT_SWEEPS[field_name] if values is None else list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    rows, reports = [], []
    for raw in values:
        value = _coerce(field_name, raw)
        label = f"{field_name}={value}"
        row = {"axis": field_name, "value": value, "label": label, "status": "ok", "error": ""}
        t0 = time.perf_counter()
        try:
            res = run_pipeline(sc.with_params(**{field_name: value}), model, with_coverage)
        except PlanningError as exc:
            row.update(status=type(exc).__name__, error=f"[{exc.stage}] {exc}")
            log.warning("sweep %s failed: %s", label, exc)
        else:
            rep = res.report
            row.update(n_swaths=rep.n_swaths, total_length_km=rep.total_length_km,
                       coverage_length_km=rep.coverage_length_km, total_energy_wh=rep.total_energy_wh,
                       coverage_energy_wh=rep.coverage_energy_wh, makespan_s=rep.makespan_s,
                       balance_ratio=rep.balance_ratio, coverage_fraction=rep.coverage_fraction)
            reports.append((label, rep))
        row["time_s"] = time.perf_counter() - t0
        rows.append(row)
    return SweepResult(field_name, rows, compare_runs(reports))
