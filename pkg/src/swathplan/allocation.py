"""Swath-to-robot allocation as a single-depot MINSUM mTSP with a minimum tour size."""
from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleInstanceError, SizeLimitError

log = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 9


@dataclass(frozen=True, eq=False)
class AllocationInstance:
    depot: np.ndarray
    swath_ids: tuple
    endpoints: np.ndarray  # (N, 2, 2): a_m, b_m
    cost: np.ndarray  # (N, N) swath-to-swath transition lower bounds
    depot_cost: np.ndarray  # (N,)
    swath_length: np.ndarray  # (N,)
    z: np.ndarray  # (N,) projection on the sweep normal
    n_robots: int
    min_tour_size: int
    warnings: tuple = ()
    endpoint_dist: np.ndarray | None = None  # (2N+1, 2N+1), depot last

    @property
    def n_swaths(self) -> int:
        return len(self.swath_ids)

    @property
    def full_cost(self) -> np.ndarray:
        """(N+1, N+1) cost matrix with the depot as the last row/column."""
        n = self.n_swaths
        m = np.zeros((n + 1, n + 1))
        m[:n, :n] = self.cost
        m[:n, n] = m[n, :n] = self.depot_cost
        return m

    def tour_cost(self, tour) -> float:
        """Depot legs + transitions + swath lengths for one ordered tour."""
        if len(tour) == 0:
            return 0.0
        t = list(tour)
        total = self.depot_cost[t[0]] + self.depot_cost[t[-1]]
        total += sum(self.cost[i, j] for i, j in zip(t, t[1:]))
        return float(total + self.swath_length[t].sum())

    def objective(self, tours) -> float:
        return float(sum(self.tour_cost(t) for t in tours))


@dataclass(frozen=True)
class Allocation:
    tours: tuple
    objective: float
    history: tuple = ()
    moves: int = 0
    warnings: tuple = ()

    def sizes(self):
        return [len(t) for t in self.tours]


def min_tour_size(n_swaths: int, n_robots: int) -> int:
    return n_swaths // n_robots


def make_instance(cost, depot_cost, swath_length, n_robots, z=None, depot=(0.0, 0.0),
                  endpoints=None, endpoint_dist=None) -> AllocationInstance:
    """Assemble an instance from raw matrices (used by tests and the planner)."""
    cost = np.asarray(cost, dtype=float)
    n = len(cost)
    if not np.allclose(cost, cost.T, rtol=0, atol=1e-9):
        raise ValueError("cost matrix must be symmetric")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    cost = np.minimum(cost, cost.T)
    np.fill_diagonal(cost, 0.0)
    if n_robots < 1:
        raise ValueError("need at least one robot")
    warnings = []
    mts = min_tour_size(n, n_robots)
    if n < n_robots:
        warnings.append(f"{n} swaths for {n_robots} robots: minimum tour size relaxed to 0")
        log.warning(warnings[-1])
    return AllocationInstance(
        depot=np.asarray(depot, dtype=float),
        swath_ids=tuple(range(n)),
        endpoints=np.zeros((n, 2, 2)) if endpoints is None else np.asarray(endpoints, dtype=float),
        cost=cost,
        depot_cost=np.asarray(depot_cost, dtype=float),
        swath_length=np.asarray(swath_length, dtype=float),
        z=np.arange(n, dtype=float) if z is None else np.asarray(z, dtype=float),
        n_robots=int(n_robots),
        min_tour_size=mts,
        warnings=tuple(warnings),
        endpoint_dist=endpoint_dist,
    )


def build_cost_matrix(swaths, g, depot, n_robots: int = 1) -> AllocationInstance:
    """Transition lower bounds between swaths from visibility-graph distances.

    ``cost[m, m']`` is the smallest feasible distance over the four endpoint
    pairings; the depot cost uses the nearer endpoint. Straight-line distance
    is used wherever the two points see each other.
    """
    depot = np.asarray(depot, dtype=float)
    ends = np.array([s.endpoints() for s in swaths])  # (N, 2, 2)
    n = len(ends)
    pts = np.vstack([ends.reshape(-1, 2), depot[None, :]])
    idx = []
    for p in pts:
        k = g.index_of(p)
        if k is None:
            raise ValueError(f"point {tuple(p)} is not registered in the visibility graph")
        idx.append(k)
    idx = np.asarray(idx)
    dist = g.distances_from(idx)[:, idx]
    direct = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    seen = np.asarray(g.adjacency[idx][:, idx].todense()) > 0
    dist = np.where(seen, direct, dist)
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)

    dep_row = dist[-1, :-1].reshape(n, 2)
    depot_cost = dep_row.min(axis=1)
    stranded = [swaths[m].id for m in range(n) if not np.isfinite(depot_cost[m])]
    if stranded:
        raise InfeasibleInstanceError(f"swaths {stranded} cannot be reached from the depot", stranded=stranded)
    block = dist[:-1, :-1].reshape(n, 2, n, 2)
    cost = block.min(axis=(1, 3))
    inst = make_instance(cost, depot_cost, [s.length for s in swaths], n_robots,
                         z=[s.z for s in swaths], depot=depot, endpoints=ends, endpoint_dist=dist)
    return inst


# ---------------------------------------------------------------------------
# heuristic solver


class _Search:
    """Mutable local-search state over tours of swath indices; the depot is index N."""

    def __init__(self, inst: AllocationInstance, tours, budget: int):
        self.inst = inst
        self.M = inst.full_cost.tolist()
        self.D = inst.n_swaths
        self.tours = [list(t) for t in tours]
        self.min_size = inst.min_tour_size
        self.budget = budget
        self.moves = 0
        self.value = self._routing_cost()
        self.history = [self.value]
        scale = max(1.0, float(np.abs(inst.full_cost).max()))
        self.tol = 1e-9 * scale

    def _routing_cost(self):
        M, D = self.M, self.D
        total = 0.0
        for t in self.tours:
            if t:
                seq = [D, *t, D]
                total += sum(M[a][b] for a, b in zip(seq, seq[1:]))
        return total

    def _apply(self, delta):
        self.value += delta
        self.moves += 1
        self.history.append(self.value)

    @property
    def exhausted(self):
        return self.moves >= self.budget

    # -- intra-tour moves ------------------------------------------------

    def two_opt(self, r):
        M, D = self.M, self.D
        t = self.tours[r]
        improved = False
        L = len(t)
        i = 0
        while i < L - 1 and not self.exhausted:
            a = t[i - 1] if i > 0 else D
            b = t[i]
            found = False
            for j in range(i + 1, L):
                c = t[j]
                d = t[j + 1] if j + 1 < L else D
                delta = M[a][c] + M[b][d] - M[a][b] - M[c][d]
                if delta < -self.tol:
                    t[i:j + 1] = t[i:j + 1][::-1]
                    self._apply(delta)
                    improved = found = True
                    break
            if not found:
                i += 1
        return improved

    def or_opt(self, r):
        M, D = self.M, self.D
        t = self.tours[r]
        improved = False
        for k in (1, 2, 3):
            i = 0
            while i + k <= len(t) and not self.exhausted:
                L = len(t)
                p = t[i - 1] if i > 0 else D
                q = t[i + k] if i + k < L else D
                first, last = t[i], t[i + k - 1]
                gain = M[p][first] + M[last][q] - M[p][q]
                chain = t[i:i + k]
                rest = t[:i] + t[i + k:]
                best = None
                for pos in range(len(rest) + 1):
                    if pos == i:
                        continue
                    x = rest[pos - 1] if pos > 0 else D
                    y = rest[pos] if pos < len(rest) else D
                    fwd = M[x][first] + M[last][y] - M[x][y]
                    rev = M[x][last] + M[first][y] - M[x][y]
                    for add, rv in ((fwd, False), (rev, True)):
                        delta = add - gain
                        if delta < -self.tol and (best is None or delta < best[0]):
                            best = (delta, pos, rv)
                if best is not None:
                    delta, pos, rv = best
                    seg = chain[::-1] if rv else chain
                    t[:] = rest[:pos] + seg + rest[pos:]
                    self._apply(delta)
                    improved = True
                else:
                    i += 1
        return improved

    # -- inter-tour moves ------------------------------------------------

    def relocate(self):
        """Move a chain of 1-3 swaths (either orientation) into another tour."""
        M, D = self.M, self.D
        improved = False
        for k in (1, 2, 3):
            for ra in range(len(self.tours)):
                A = self.tours[ra]
                i = 0
                while i + k <= len(A) and not self.exhausted:
                    if len(A) - k < self.min_size:
                        break
                    first, last = A[i], A[i + k - 1]
                    p = A[i - 1] if i > 0 else D
                    q = A[i + k] if i + k < len(A) else D
                    gain = M[p][first] + M[last][q] - M[p][q]
                    best = None
                    for rb, B in enumerate(self.tours):
                        if rb == ra:
                            continue
                        for pos in range(len(B) + 1):
                            u = B[pos - 1] if pos > 0 else D
                            v = B[pos] if pos < len(B) else D
                            fwd = M[u][first] + M[last][v] - M[u][v]
                            rev = M[u][last] + M[first][v] - M[u][v]
                            for add, rv in ((fwd, False), (rev, True)):
                                delta = add - gain
                                if delta < -self.tol and (best is None or delta < best[0]):
                                    best = (delta, rb, pos, rv)
                    if best is not None:
                        delta, rb, pos, rv = best
                        chain = A[i:i + k]
                        del A[i:i + k]
                        self.tours[rb][pos:pos] = chain[::-1] if rv else chain
                        self._apply(delta)
                        improved = True
                    else:
                        i += 1
        return improved

    def swap(self):
        M, D = self.M, self.D
        improved = False
        R = len(self.tours)
        for ra in range(R):
            for rb in range(ra + 1, R):
                A, B = self.tours[ra], self.tours[rb]
                for i in range(len(A)):
                    if self.exhausted:
                        return improved
                    x = A[i]
                    pa = A[i - 1] if i > 0 else D
                    qa = A[i + 1] if i + 1 < len(A) else D
                    best = None
                    for j in range(len(B)):
                        y = B[j]
                        pb = B[j - 1] if j > 0 else D
                        qb = B[j + 1] if j + 1 < len(B) else D
                        delta = (M[pa][y] + M[y][qa] + M[pb][x] + M[x][qb]
                                 - M[pa][x] - M[x][qa] - M[pb][y] - M[y][qb])
                        if delta < -self.tol and (best is None or delta < best[0]):
                            best = (delta, j)
                    if best is not None:
                        delta, j = best
                        A[i], B[j] = B[j], A[i]
                        self._apply(delta)
                        improved = True
        return improved

    def exchange_tails(self):
        """2-opt* between tours: swap the suffixes after cut points."""
        M, D = self.M, self.D
        improved = False
        R = len(self.tours)
        for ra in range(R):
            for rb in range(ra + 1, R):
                A, B = self.tours[ra], self.tours[rb]
                best = None
                for i in range(len(A) + 1):
                    a0 = A[i - 1] if i > 0 else D
                    a1 = A[i] if i < len(A) else D
                    for j in range(len(B) + 1):
                        na, nb = i + len(B) - j, j + len(A) - i
                        if na < self.min_size or nb < self.min_size:
                            continue
                        b0 = B[j - 1] if j > 0 else D
                        b1 = B[j] if j < len(B) else D
                        delta = M[a0][b1] + M[b0][a1] - M[a0][a1] - M[b0][b1]
                        # M[D][D] == 0, so an emptied tour costs nothing
                        if delta < -self.tol and (best is None or delta < best[0]):
                            best = (delta, i, j)
                if best is not None and not self.exhausted:
                    delta, i, j = best
                    A[i:], B[j:] = B[j:], A[i:]
                    self._apply(delta)
                    improved = True
        return improved

    def run(self):
        while not self.exhausted:
            improved = False
            for r in range(len(self.tours)):
                improved |= self.two_opt(r)
                improved |= self.or_opt(r)
            if len(self.tours) > 1:
                improved |= self.relocate()
                improved |= self.swap()
                improved |= self.exchange_tails()
            if not improved:
                break
        return self


def _seed_tours(inst: AllocationInstance):
    """Contiguous blocks along the sweep normal, ordered by nearest neighbour."""
    n, R = inst.n_swaths, inst.n_robots
    order = sorted(range(n), key=lambda m: (inst.z[m], m))
    base, extra = divmod(n, R)
    blocks, lo = [], 0
    for r in range(R):
        size = base + (1 if r < extra else 0)
        blocks.append(order[lo:lo + size])
        lo += size
    tours = []
    for block in blocks:
        left = list(block)
        tour = []
        if left:
            cur = min(left, key=lambda m: (inst.depot_cost[m], m))
            while True:
                tour.append(cur)
                left.remove(cur)
                if not left:
                    break
                cur = min(left, key=lambda m: (inst.cost[cur, m], m))
        tours.append(tour)
    return tours


def _perturb(tours, rng: random.Random, min_size: int):
    """Kick a local optimum: a segment reversal plus random cross-tour exchanges."""
    tours = [list(t) for t in tours]
    r = rng.randrange(len(tours))
    t = tours[r]
    if len(t) >= 3:
        i, j = sorted(rng.sample(range(len(t)), 2))
        t[i:j + 1] = t[i:j + 1][::-1]
    filled = [k for k, t in enumerate(tours) if t]
    if len(filled) >= 2:
        for _ in range(rng.randint(1, 2)):
            a, b = rng.sample(filled, 2)
            i, j = rng.randrange(len(tours[a])), rng.randrange(len(tours[b]))
            tours[a][i], tours[b][j] = tours[b][j], tours[a][i]
    donors = [k for k, t in enumerate(tours) if t and len(t) - 1 >= min_size]
    if len(tours) > 1 and donors and rng.random() < 0.5:
        a = rng.choice(donors)
        b = rng.choice([k for k in range(len(tours)) if k != a])
        x = tours[a].pop(rng.randrange(len(tours[a])))
        tours[b].insert(rng.randrange(len(tours[b]) + 1), x)
    return tours


def solve_mtsp(inst: AllocationInstance, seed: int = 0, move_budget: int | None = None,
               restarts: int = 40) -> Allocation:
    """Heuristic MINSUM mTSP under the minimum-tour-size constraint.

    Balanced contiguous seeding along the sweep normal, nearest-neighbour
    ordering, then 2-opt / or-opt inside tours and relocate / swap / tail
    exchange across tours, rejecting moves that shrink a tour below the
    minimum size. ``restarts`` perturbation rounds (seeded) follow the first
    local optimum; the best solution found is kept.
    """
    n = inst.n_swaths
    if n == 0:
        return Allocation(tuple(() for _ in range(inst.n_robots)), 0.0, warnings=inst.warnings)
    budget = 200 * n if move_budget is None else int(move_budget)
    rng = random.Random(seed)
    search = _Search(inst, _seed_tours(inst), budget).run()
    best_tours = [list(t) for t in search.tours]
    best_value = search.value
    history = list(search.history)
    moves = search.moves
    for _ in range(restarts):
        if moves >= budget:
            break
        trial = _Search(inst, _perturb(best_tours, rng, inst.min_tour_size), budget - moves).run()
        moves += trial.moves
        if trial.value < best_value - 1e-9 * max(1.0, abs(best_value)):
            best_tours = [list(t) for t in trial.tours]
            best_value = trial.value
            history.append(best_value)
    tours = tuple(tuple(int(m) for m in t) for t in best_tours)
    check_allocation(inst, tours)
    return Allocation(tours, inst.objective(tours), tuple(history), moves, inst.warnings)


def check_allocation(inst: AllocationInstance, tours):
    flat = [m for t in tours for m in t]
    if sorted(flat) != list(range(inst.n_swaths)):
        raise AssertionError("tours do not partition the swath set")
    if len(tours) != inst.n_robots:
        raise AssertionError("wrong number of tours")
    small = [len(t) for t in tours if len(t) < inst.min_tour_size]
    if small:
        raise AssertionError(f"tour sizes {small} below the minimum {inst.min_tour_size}")


# ---------------------------------------------------------------------------
# exhaustive oracle


def _best_order(inst, subset, memo):
    key = frozenset(subset)
    if key in memo:
        return memo[key]
    if not subset:
        memo[key] = (0.0, ())
        return memo[key]
    best = (np.inf, ())
    for perm in itertools.permutations(sorted(subset)):
        if len(perm) > 1 and perm[0] > perm[-1]:
            continue  # symmetric costs: each tour and its reverse cost the same
        c = inst.tour_cost(perm)
        if c < best[0] - 1e-12:
            best = (c, perm)
    memo[key] = best
    return best


def _partitions(items, k, min_size):
    """Set partitions of ``items`` into exactly ``k`` unlabeled blocks (empty blocks allowed if min_size == 0)."""
    items = list(items)

    def rec(i, blocks):
        if i == len(items):
            if len(blocks) <= k and all(len(b) >= min_size for b in blocks):
                if min_size == 0 or len(blocks) == k:
                    yield [list(b) for b in blocks] + [[] for _ in range(k - len(blocks))]
            return
        x = items[i]
        for b in blocks:
            b.append(x)
            yield from rec(i + 1, blocks)
            b.pop()
        if len(blocks) < k:
            blocks.append([x])
            yield from rec(i + 1, blocks)
            blocks.pop()

    yield from rec(0, [])


def brute_force_mtsp(inst: AllocationInstance) -> Allocation:
    """Exact optimum by enumerating every partition and every visiting order."""
    n = inst.n_swaths
    if n > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f"brute force supports at most {BRUTE_FORCE_LIMIT} swaths, got {n}")
    memo = {}
    best_val, best_tours = np.inf, None
    for blocks in _partitions(range(n), inst.n_robots, inst.min_tour_size):
        tours = [_best_order(inst, b, memo)[1] for b in blocks]
        val = inst.objective(tours)
        if val < best_val - 1e-12:
            best_val, best_tours = val, tours
    tours = tuple(tuple(t) for t in best_tours)
    return Allocation(tours, float(best_val), warnings=inst.warnings)
