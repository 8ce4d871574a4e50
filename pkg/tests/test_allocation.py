import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rect_scenario
from mtsp_cases import oracle_cases, random_instance
from oracles import held_karp, mtsp_exhaustive
from swathplan.allocation import (brute_force_mtsp, build_cost_matrix, check_allocation, make_instance,
                                  min_tour_size, solve_mtsp)
from swathplan.errors import SizeLimitError
from swathplan.geom import Polygon
from swathplan.orientation import frame_at
from swathplan.pipeline import run_pipeline
from swathplan.swaths import generate_swaths
from swathplan.visgraph import build_graph, transition_distance
from swathplan.workspace import build_feasible


def rect(x0, y0, x1, y1):
    return Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def instance_from_field(roi, obstacles, w, depot, n_robots=1, h=0.0):
    ws = build_feasible(roi, obstacles, h)
    s = generate_swaths(ws, frame_at(np.vstack([p.exterior for p in ws.feasible]), 0.0), w)
    pts = [p for sw in s for p in (sw.a, sw.b)] + [depot]
    g = build_graph(ws, pts, w)
    return s, g, build_cost_matrix(s, g, depot, n_robots)


class TestCostMatrix:
    def test_adjacent_swaths_cost_w(self):
        s, _, inst = instance_from_field(rect(0, 0, 100, 20), (), 10.0, (0.0, 0.0))
        assert len(s) == 2
        assert inst.cost[0, 1] == pytest.approx(10.0)
        assert inst.depot_cost == pytest.approx([5.0, 15.0])

    def test_symmetric_zero_diagonal(self):
        roi = Polygon([(0, 0), (60, 0), (60, 40), (0, 40)], [[(20, 12), (20, 28), (40, 28), (40, 12)]])
        _, _, inst = instance_from_field(roi, (), 4.0, (1.0, 1.0))
        assert np.array_equal(inst.cost, inst.cost.T)
        assert np.all(np.diag(inst.cost) == 0)
        assert np.all(np.isfinite(inst.cost))

    def test_blocked_pair_uses_detour(self):
        roi = rect(0, 0, 60, 40)
        obstacle = rect(20, -1, 40, 30)
        s, g, inst = instance_from_field(roi, [obstacle], 5.0, (1.0, 35.0), h=0.0)
        # independent recomputation: min over the four endpoint pairings of fresh graph distances
        fresh = build_graph(g_ws(roi, [obstacle]), (), 5.0)
        left = [k for k, sw in enumerate(s) if sw.b[0] <= 20 + 1e-9 and sw.z < 30]
        right = [k for k, sw in enumerate(s) if sw.a[0] >= 40 - 1e-9 and sw.z < 30]
        m, n = left[0], right[0]
        want = min(transition_distance(fresh, p, q) for p in s[m].endpoints() for q in s[n].endpoints())
        assert want > 20.0  # the straight gap is blocked
        assert inst.cost[m, n] == pytest.approx(want, rel=1e-9)

    def test_min_tour_size(self):
        assert min_tour_size(10, 3) == 3
        assert min_tour_size(2, 3) == 0


def g_ws(roi, obstacles):
    return build_feasible(roi, obstacles, 0.0)


class TestSolver:
    def test_four_swaths_two_robots(self, rng):
        inst = random_instance(rng, 4, 2)
        alloc = solve_mtsp(inst)
        assert sorted(alloc.sizes()) == [2, 2]

    def test_single_robot_matches_held_karp(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            inst = random_instance(rng, n, 1)
            alloc = solve_mtsp(inst)
            exact = held_karp(inst.full_cost[np.ix_([n, *range(n)], [n, *range(n)])]) + inst.swath_length.sum()
            assert alloc.objective <= exact * 1.05 + 1e-9
            assert alloc.objective >= exact - 1e-6

    def test_against_exhaustive_oracle(self):
        for n_swaths, n_robots, inst in oracle_cases(count=30):
            alloc = solve_mtsp(inst)
            check_allocation(inst, alloc.tours)
            exact = mtsp_exhaustive(inst.cost, inst.depot_cost, inst.swath_length, n_robots, inst.min_tour_size)
            assert alloc.objective <= exact * 1.05 + 1e-9
            assert alloc.objective >= exact - 1e-6

    def test_objective_matches_tours(self, rng):
        inst = random_instance(rng, 12, 3)
        alloc = solve_mtsp(inst)
        assert alloc.objective == pytest.approx(inst.objective(alloc.tours))

    def test_deterministic(self, rng):
        inst = random_instance(rng, 25, 4)
        assert solve_mtsp(inst, seed=3).tours == solve_mtsp(inst, seed=3).tours

    def test_history_monotone(self, rng):
        for _ in range(5):
            inst = random_instance(rng, 30, 3)
            h = solve_mtsp(inst, seed=1).history
            assert len(h) >= 1
            assert all(b <= a + 1e-9 for a, b in zip(h, h[1:]))

    def test_move_budget(self, rng):
        inst = random_instance(rng, 40, 3)
        alloc = solve_mtsp(inst, move_budget=10)
        assert alloc.moves <= 10
        check_allocation(inst, alloc.tours)

    def test_fewer_swaths_than_robots(self, rng):
        inst = random_instance(rng, 2, 4)
        assert inst.min_tour_size == 0 and inst.warnings
        alloc = solve_mtsp(inst)
        assert sum(alloc.sizes()) == 2 and len(alloc.tours) == 4

    def test_empty_instance(self):
        inst = make_instance(np.zeros((0, 0)), [], [], 2)
        alloc = solve_mtsp(inst)
        assert alloc.tours == ((), ()) and alloc.objective == 0.0

    @given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(1, 6))
    def test_constraints_always_hold(self, seed, n, r):
        inst = random_instance(np.random.default_rng(seed), n, r)
        alloc = solve_mtsp(inst, seed=seed % 7)
        flat = sorted(m for t in alloc.tours for m in t)
        assert flat == list(range(n))
        assert min(alloc.sizes()) >= n // r

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            make_instance([[0, 1], [2, 0]], [1, 1], [1, 1], 1)

    def test_contiguous_blocks_on_rectangle(self):
        for n_robots, w in ((2, 5.0), (3, 5.0), (3, 2.5), (4, 2.5)):
            sc = rect_scenario(n_robots=n_robots, depot=(50.0, 0.0)).with_params(swath_width=w)
            res = run_pipeline(sc, with_coverage=False)
            for tour in res.allocation.tours:
                lines = sorted(res.swaths[m].line_index for m in tour)
                assert lines == list(range(lines[0], lines[0] + len(lines)))


class TestBruteForce:
    def test_two_swaths_one_robot(self):
        # both orderings cost the same under symmetric costs; the optimum is their common value
        inst = make_instance(np.array([[0.0, 5.0], [5.0, 0.0]]), [1.0, 7.0], [10.0, 10.0], 1)
        alloc = brute_force_mtsp(inst)
        assert alloc.objective == pytest.approx(1 + 5 + 7 + 20)

    def test_symmetric_three_by_three(self):
        cost = np.full((3, 3), 4.0)
        np.fill_diagonal(cost, 0)
        inst = make_instance(cost, [2.0] * 3, [1.0] * 3, 3)
        alloc = brute_force_mtsp(inst)
        assert sorted(alloc.sizes()) == [1, 1, 1]
        assert alloc.objective == pytest.approx(3 * (4 + 1))

    def test_permutation_invariant(self, rng):
        inst = random_instance(rng, 8, 2)
        base = brute_force_mtsp(inst).objective
        for _ in range(3):
            p = rng.permutation(8)
            perm = make_instance(inst.cost[np.ix_(p, p)], inst.depot_cost[p], inst.swath_length[p], 2)
            assert brute_force_mtsp(perm).objective == pytest.approx(base, rel=1e-12)

    def test_agrees_with_independent_oracle(self):
        for n_swaths, n_robots, inst in oracle_cases(seed=99, count=15):
            exact = mtsp_exhaustive(inst.cost, inst.depot_cost, inst.swath_length, n_robots, inst.min_tour_size)
            assert brute_force_mtsp(inst).objective == pytest.approx(exact, rel=1e-9)

    def test_size_limit(self, rng):
        with pytest.raises(SizeLimitError):
            brute_force_mtsp(random_instance(rng, 10, 2))
