"""Plan serialisation: GeoJSON per robot, CSV waypoints, metrics JSON."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .routing import CoveragePlan, Leg


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def plan_feature(plan: CoveragePlan) -> dict:
    legs = [{"kind": leg.kind, "start": leg.start, "end": leg.end, "length_m": leg.length,
             "swath_id": leg.swath_id, "depot_leg": leg.depot_leg} for leg in plan.legs]
    coords = plan.waypoints.tolist()
    geom = {"type": "LineString", "coordinates": coords} if len(coords) > 1 else {"type": "Point",
                                                                                    "coordinates": coords[0]}
    return {
        "type": "Feature",
        "geometry": geom,
        "properties": {
            "robot_id": int(plan.robot_id),
            "tour": [int(m) for m in plan.tour],
            "headings": [[int(k), int(v)] for k, v in sorted(plan.headings.items())],
            "length_m": plan.length,
            "legs": legs,
        },
    }


def plan_geojson(plan: CoveragePlan) -> str:
    doc = {"type": "FeatureCollection", "features": [plan_feature(plan)]}
    return json.dumps(doc, indent=1) + "\n"


def plan_from_feature(feat: dict) -> CoveragePlan:
    props = feat.get("properties") or {}
    geom = feat.get("geometry") or {}
    if geom.get("type") == "Point":
        pts = np.asarray([geom["coordinates"]], dtype=float)
    elif geom.get("type") == "LineString":
        pts = np.asarray(geom["coordinates"], dtype=float)
    else:
        raise ScenarioError(f"plan geometry must be a LineString, got {geom.get('type')!r}")
    legs = tuple(Leg(d["kind"], int(d["start"]), int(d["end"]), float(d["length_m"]),
                     None if d.get("swath_id") is None else int(d["swath_id"]), bool(d.get("depot_leg")))
                 for d in props.get("legs", []))
    headings = {int(k): int(v) for k, v in props.get("headings", [])}
    return CoveragePlan(int(props.get("robot_id", 0)), pts, legs, headings, tuple(props.get("tour", ())))


def read_plan_geojson(path) -> list[CoveragePlan]:
    doc = json.loads(Path(path).read_text())
    return [plan_from_feature(f) for f in doc.get("features", [])]


def waypoints_csv(plan: CoveragePlan) -> str:
    """One row per waypoint; ``leg`` names the leg that arrives at it."""
    kind = ["start"] + [""] * (len(plan.waypoints) - 1)
    for leg in plan.legs:
        for k in range(leg.start + 1, leg.end + 1):
            kind[k] = "depot" if leg.depot_leg else leg.kind
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["index", "x", "y", "leg"])
    for k, (x, y) in enumerate(plan.waypoints):
        wr.writerow([k, repr(float(x)), repr(float(y)), kind[k]])
    return buf.getvalue()


def read_waypoints_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([[float(r["x"]), float(r["y"])] for r in rows], dtype=float).reshape(-1, 2)


def metrics_document(result) -> dict:
    """Deterministic run summary (no wall-clock values)."""
    sc = result.scenario
    return {
        "scenario": {
            "name": sc.name,
            "swath_width": sc.swath_width,
            "buffer_scale": sc.buffer_scale,
            "headland": sc.headland,
            "n_robots": sc.n_robots,
            "orientation": sc.orientation,
            "seed": sc.seed,
            "depot": [float(c) for c in result.depot],
        },
        "frame": {"angle_rad": result.frame.angle, "fallback": bool(result.frame.fallback)},
        "swaths": {"count": len(result.swaths), "lines": result.swaths.n_lines,
                   "total_length_m": result.swaths.total_length},
        "allocation": {"tours": [list(t) for t in result.allocation.tours],
                       "objective_m": result.allocation.objective},
        "metrics": result.report.to_dict(),
        "warnings": list(result.warnings),
    }


def write_outputs(result, out_dir, svg: bool = False) -> list[Path]:
    """Write plan files, waypoints, metrics and timings into ``out_dir``."""
    out = Path(out_dir)
    written = []
    for plan in result.plans:
        r = plan.robot_id
        atomic_write(out / f"plan_{r}.geojson", plan_geojson(plan))
        atomic_write(out / f"waypoints_{r}.csv", waypoints_csv(plan))
        written += [out / f"plan_{r}.geojson", out / f"waypoints_{r}.csv"]
    atomic_write(out / "metrics.json", json.dumps(metrics_document(result), indent=1, sort_keys=True) + "\n")
    timings = dict(result.timings, total=result.total_time)
    atomic_write(out / "timings.json", json.dumps(timings, indent=1) + "\n")
    written += [out / "metrics.json", out / "timings.json"]
    if svg:
        from .render import render_svg
        atomic_write(out / "report.svg", render_svg(result.plans, result.workspace))
        written.append(out / "report.svg")
    return written


def sweep_csv(result, fields) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    wr.writeheader()
    for row in result.csv_rows():
        wr.writerow(row)
    return buf.getvalue()
