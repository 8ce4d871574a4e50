"""Command-line entry point: ``swathplan plan | sweep | validate | list``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import PlanningError, ScenarioError
from .metrics import EnergyModel
from .pipeline import SWEEP_FIELDS, run_pipeline, sweep
from .scenario import bundled_names, resolve
from .workspace import build_feasible

log = logging.getLogger("swathplan")


def _point(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return (x, y)


def _energy_overrides(text):
    out = {}
    for item in filter(None, (text or "").split(",")):
        key, _, val = item.partition("=")
        if key not in EnergyModel.__dataclass_fields__:
            raise argparse.ArgumentTypeError(f"unknown energy model field {key!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad value for {key}: {val!r}") from None
    return out


def _add_scenario_args(p):
    p.add_argument("--scenario", required=True, help="GeoJSON scenario file or bundled scenario name")
    p.add_argument("--robots", type=int, help="fleet size")
    p.add_argument("--swath-width", type=float, help="swath width in metres")
    p.add_argument("--buffer-scale", type=float, help="headland as a multiple of the swath width")
    p.add_argument("--orientation", choices=["mar", "scan", "pca", "minwidth"])
    p.add_argument("--depot", type=_point, help="depot as x,y")
    p.add_argument("--seed", type=int)
    p.add_argument("--vg-spacing", type=float, help="boundary sample spacing for the visibility graph")
    p.add_argument("--energy-model", type=_energy_overrides, default={},
                   help="comma list of field=value, e.g. cruise_speed=8,turn_penalty=0.3")


def build_parser():
    ap = argparse.ArgumentParser(prog="swathplan", description="Multi-robot boustrophedon coverage planner")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan coverage paths for one scenario")
    _add_scenario_args(p)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--svg", action="store_true", help="also write report.svg")

    s = sub.add_parser("sweep", help="rerun a scenario across one parameter")
    _add_scenario_args(s)
    s.add_argument("--axis", required=True, choices=["orientation", "buffer", "robots"])
    s.add_argument("--values", nargs="+", help="values to try (defaults to the standard grid)")
    s.add_argument("--out", default="out")

    v = sub.add_parser("validate", help="parse a scenario and check its feasible space")
    _add_scenario_args(v)

    sub.add_parser("list", help="list bundled scenarios")
    return ap


def _load(args):
    sc = resolve(args.scenario, n_robots=args.robots, swath_width=args.swath_width,
                 buffer_scale=args.buffer_scale, orientation=args.orientation, depot=args.depot,
                 seed=args.seed, vg_spacing=args.vg_spacing)
    model = EnergyModel(**{**sc.energy_model, **args.energy_model})
    return sc, model


def cmd_plan(args):
    from .export import write_outputs

    sc, model = _load(args)
    res = run_pipeline(sc, model)
    write_outputs(res, args.out, svg=args.svg)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"scenario {sc.name}: {len(res.swaths)} swaths, {sc.n_robots} robots, "
          f"{res.total_time:.2f} s")
    print(res.report.table())
    print(f"outputs in {Path(args.out).resolve()}")
    return 0


def cmd_sweep(args):
    from .export import atomic_write, sweep_csv

    sc, model = _load(args)
    res = sweep(sc, args.axis, args.values, model)
    atomic_write(Path(args.out) / "sweep.csv", sweep_csv(res, SWEEP_FIELDS))
    print(f"{'rank':>4}  {'configuration':<24} {'E Wh':>10} {'len km':>9} {'dE %':>7}")
    for row in res.ranking:
        print(f"{row['rank']:>4}  {row['label']:<24} {row['total_energy_wh']:>10.2f} "
              f"{row['total_length_km']:>9.3f} {row['delta_energy_pct']:>7.2f}")
    failed = [r for r in res.rows if r["status"] != "ok"]
    for r in failed:
        print(f"failed: {r['label']}: {r['error']}", file=sys.stderr)
    return 0 if len(failed) < len(res.rows) else max(1, _exit_for(failed[0]["status"]))


def _exit_for(status):
    from . import errors
    cls = getattr(errors, status, None)
    return getattr(cls, "exit_code", 1)


def cmd_validate(args):
    sc, _ = _load(args)
    ws = build_feasible(sc.roi, sc.obstacles, sc.headland, sc.buffer_scale)
    for w in sc.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(json.dumps({
        "name": sc.name,
        "roi_area_m2": sc.roi.area,
        "obstacles": len(sc.obstacles),
        "headland_m": sc.headland,
        "feasible_components": len(ws.feasible),
        "feasible_area_m2": ws.area,
    }, indent=1))
    return 0


def cmd_list(args):
    for name in bundled_names():
        print(name)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"plan": cmd_plan, "sweep": cmd_sweep, "validate": cmd_validate, "list": cmd_list}[args.command]
    try:
        return handler(args)
    except PlanningError as exc:
        stage = f" [{exc.stage}]" if exc.stage else ""
        print(f"error{stage}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        # parameter validation outside the scenario loader
        print(f"error: {exc}", file=sys.stderr)
        return ScenarioError.exit_code


if __name__ == "__main__":
    sys.exit(main())
