import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import bundled_run, rect_scenario
from oracles import coverage_ratio_shapely
from swathplan.geom import Polygon, RigidTransform, apply_transform
from swathplan.metrics import EnergyModel, compare_runs, coverage_fraction, evaluate
from swathplan.pipeline import run_pipeline
from swathplan.routing import SWATH, TRANSITION, CoveragePlan, Leg
from swathplan.scenario import Scenario


def straight_plan(length, robot_id=0):
    pts = np.array([[0.0, 0.0], [length, 0.0]])
    return CoveragePlan(robot_id, pts, (Leg(SWATH, 0, 1, length, 0),), {0: 1}, (0,))


class TestEnergyModel:
    def test_straight_line_arithmetic(self):
        m = EnergyModel(cruise_speed=10, cruise_power=500, turn_penalty=0.2, turn_time=3)
        rep = evaluate([straight_plan(3600.0)], model=m, with_coverage=False)
        # 3600 m at 10 m/s is 360 s = 0.1 h, so 500 W draws 50 Wh
        assert rep.total_energy_wh == pytest.approx(50.0)
        assert rep.makespan_s == pytest.approx(360.0)
        assert rep.robots[0].total_turns == 0

    def test_rejects_non_positive(self):
        for k in ("cruise_speed", "cruise_power", "turn_penalty", "turn_time"):
            with pytest.raises(ValueError):
                EnergyModel(**{k: 0.0})

    @given(st.floats(0, 1e5), st.floats(0.1, 1e4), st.integers(0, 500), st.integers(1, 50))
    def test_strictly_monotone(self, length, extra, turns, more):
        m = EnergyModel()
        assert m.energy(length + extra, turns) > m.energy(length, turns)
        assert m.energy(length, turns + more) > m.energy(length, turns)
        assert m.duration(length, turns + more) > m.duration(length, turns)


class TestEvaluate:
    def test_empty(self):
        rep = evaluate([])
        assert rep.total_length_km == 0 and rep.total_energy_wh == 0 and rep.makespan_s == 0
        assert rep.balance_ratio == 0 and rep.coverage_fraction == 0 and rep.robots == ()
        idle = CoveragePlan(0, np.zeros((1, 2)), ())
        rep = evaluate([idle])
        assert rep.total_length_km == 0 and rep.total_energy_wh == 0

    def test_rectangle_closed_form(self):
        res = run_pipeline(rect_scenario(n_robots=1, depot=(0.0, 0.0)))
        rep = res.report
        (r,) = rep.robots
        assert r.turns == 8
        assert r.length_km * 1000 == pytest.approx(540 + 5 + math.hypot(100, 45), rel=1e-9)
        assert r.swath_length_km * 1000 == pytest.approx(500)
        assert r.transition_length_km * 1000 == pytest.approx(40)
        assert rep.coverage_fraction == 1.0
        m = rep.model
        assert rep.coverage_energy_wh == pytest.approx(m.energy(540, 8))
        assert rep.total_energy_wh == pytest.approx(m.energy(r.length_km * 1000, r.total_turns))

    def test_fleet_invariants(self, scenario_names):
        for name in scenario_names:
            rep = bundled_run(name).report
            assert rep.total_length_km == pytest.approx(sum(r.length_km for r in rep.robots), rel=1e-9)
            assert rep.coverage_energy_wh <= rep.total_energy_wh
            assert rep.makespan_s == max(r.duration_s for r in rep.robots)
            lengths = [r.length_km for r in rep.robots]
            assert rep.balance_ratio == pytest.approx(max(lengths) / np.mean(lengths))
            for r in rep.robots:
                assert r.turns <= r.total_turns

    def test_coverage_against_shapely(self):
        res = bundled_run("simple", coverage=True)
        w = res.swaths.width
        ours = res.report.coverage_fraction
        ref = coverage_ratio_shapely(res.plans, res.workspace.feasible, w, 0.05 * w)
        assert 0 <= ours <= 1
        assert ours == pytest.approx(ref, abs=0.005)

    def test_coverage_drops_without_a_robot(self):
        res = bundled_run("rect", coverage=True)
        partial = coverage_fraction(res.plans[1:], res.workspace, res.swaths.width)
        assert partial < res.report.coverage_fraction

    def test_rigid_invariance(self):
        roi = Polygon([(0, 0), (120, 0), (120, 40), (70, 40), (70, 80), (0, 80)])
        ob = Polygon([(20, 20), (35, 20), (35, 30), (20, 30)])
        base = Scenario("L", roi, (ob,), swath_width=8.0, n_robots=2, orientation="mar")
        T = RigidTransform(0.7, (1000.0, -250.0))
        moved = Scenario("L", apply_transform(roi, T), (apply_transform(ob, T),), swath_width=8.0, n_robots=2,
                         orientation="mar")
        a = run_pipeline(base, with_coverage=False).report
        b = run_pipeline(moved, with_coverage=False).report
        assert b.total_energy_wh == pytest.approx(a.total_energy_wh, rel=1e-6)
        assert b.total_length_km == pytest.approx(a.total_length_km, rel=1e-6)


class TestCompare:
    def test_identical(self):
        rep = evaluate([straight_plan(100.0)])
        rows = compare_runs([("a", rep), ("b", rep)])
        assert [r["delta_energy_pct"] for r in rows] == [0.0, 0.0]
        assert [r["delta_length_pct"] for r in rows] == [0.0, 0.0]

    def test_length_order(self):
        long, short = evaluate([straight_plan(200.0)]), evaluate([straight_plan(100.0)])
        rows = compare_runs([("long", long), ("short", short)])
        assert [r["label"] for r in rows] == ["short", "long"]
        assert rows[1]["delta_length_pct"] == pytest.approx(100.0)
        assert [r["rank"] for r in rows] == [1, 2]

    def test_orientation_winner(self):
        sc = bundled_run("cape").scenario
        reports = [(s, run_pipeline(sc.with_params(orientation=s), with_coverage=False).report)
                   for s in ("mar", "scan", "pca", "minwidth")]
        rows = compare_runs(reports)
        assert rows[0]["total_energy_wh"] == min(r.total_energy_wh for _, r in reports)

    def test_empty(self):
        assert compare_runs([]) == []

    def test_transition_leg_counts(self):
        pts = np.array([[0, 0], [10, 0], [10, 5], [0, 5]], dtype=float)
        legs = (Leg(SWATH, 0, 1, 10.0, 0), Leg(TRANSITION, 1, 2, 5.0), Leg(SWATH, 2, 3, 10.0, 1))
        rep = evaluate([CoveragePlan(0, pts, legs, {0: 1, 1: -1}, (0, 1))], with_coverage=False)
        r = rep.robots[0]
        assert r.turns == 2 and r.transition_length_km == pytest.approx(0.005)
