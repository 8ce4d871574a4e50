"""Time the numba kernels against the pure-numpy fallback.

Runs each public kernel on the feasible space of a bundled scenario with
both backends, checks the outputs agree, and prints a small table.

    python3 benchmarks/bench_kernels.py --scenario wetland --repeat 3
"""
import argparse
import time

import numpy as np

from swathplan import kernels
from swathplan.geom import EPS_GEOM
from swathplan.scenario import load_bundled
from swathplan.workspace import build_feasible


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(ws, n_points, n_nodes, seed):
    rng = np.random.default_rng(seed)
    edges = ws.edges
    lo = edges[:, :2].min(0)
    hi = edges[:, :2].max(0)
    pts = rng.uniform(lo, hi, size=(n_points, 2))
    p = rng.uniform(lo, hi, size=(n_points // 10, 2))
    q = rng.uniform(lo, hi, size=(n_points // 10, 2))
    nodes = np.vstack([r for comp in ws.feasible for r in comp.rings])
    if len(nodes) > n_nodes:
        nodes = nodes[np.linspace(0, len(nodes) - 1, n_nodes).astype(int)]
    segs = np.hstack([p, q])[:200]
    return {
        "classify_points": lambda: kernels.classify_points(pts, edges, EPS_GEOM),
        "min_distance": lambda: kernels.min_distance(pts, edges),
        "covered_mask": lambda: kernels.covered_mask(pts, segs, 5.0),
        "segments_inside": lambda: kernels.segments_inside(p, q, edges, EPS_GEOM),
        "visibility_matrix": lambda: kernels.visibility_matrix(nodes, edges, EPS_GEOM),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="wetland")
    ap.add_argument("--points", type=int, default=50_000)
    ap.add_argument("--nodes", type=int, default=250)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sc = load_bundled(args.scenario)
    ws = build_feasible(sc.roi, sc.obstacles, sc.headland)
    print(f"scenario {sc.name}: {len(ws.edges)} boundary edges, {args.points} points, {args.nodes} graph nodes")
    if kernels.BACKEND != "numba":
        print("numba unavailable; timing the numpy path only")
    table = {}
    results = {}
    for backend in ("numba", "numpy"):
        if backend == "numba" and not kernels.HAVE_NUMBA:
            continue
        prev = kernels.set_backend(backend)
        try:
            for name, fn in cases(ws, args.points, args.nodes, args.seed).items():
                fn()  # warm-up, includes JIT compilation for numba
                t, out = best_of(fn, args.repeat)
                table.setdefault(name, {})[backend] = t
                results.setdefault(name, {})[backend] = out
        finally:
            kernels.set_backend(prev)

    print(f"{'kernel':<20} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  agree")
    for name, row in table.items():
        nb, npy = row.get("numba"), row.get("numpy")
        outs = results[name]
        agree = "-"
        if len(outs) == 2:
            a, b = outs["numba"], outs["numpy"]
            agree = "yes" if (np.array_equal(a, b) if a.dtype == bool or a.dtype.kind == "i"
                              else np.allclose(a, b, rtol=0, atol=1e-9)) else "NO"
        speed = f"{npy / nb:8.1f}" if nb and npy else f"{'-':>8}"
        nb_s = f"{nb:10.4f}" if nb is not None else f"{'-':>10}"
        print(f"{name:<20} {nb_s} {npy:10.4f} {speed}  {agree}")


if __name__ == "__main__":
    main()
