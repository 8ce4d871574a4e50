"""Visibility graph over the closed feasible space.

Nodes are every ring vertex of the feasible space, extra points sampled
along each ring edge, and registered query points (swath endpoints, depot).
Two nodes are joined when the segment between them stays in the closure of
the feasible space; weights are Euclidean lengths.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from . import kernels
from .errors import InfeasibleNodeError, UnreachableError
from .geom import EPS_GEOM


def _ring_samples(ring: np.ndarray, spacing: float) -> np.ndarray:
    """Points spaced at most ``spacing`` apart along every edge (vertices excluded)."""
    out = []
    nxt = np.roll(ring, -1, axis=0)
    for a, b in zip(ring, nxt):
        length = math.hypot(*(b - a))
        pieces = int(math.ceil(length / spacing - 1e-9))
        if pieces > 1:
            f = np.arange(1, pieces)[:, None] / pieces
            out.append(a + f * (b - a))
    return np.vstack(out) if out else np.zeros((0, 2))


def _merge_duplicates(points: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Collapse points closer than ``tol``; returns (unique points, index map)."""
    parent = np.arange(len(points))
    for i, j in sorted(cKDTree(points).query_pairs(tol)):
        ri, rj = i, j
        while parent[ri] != ri:
            ri = parent[ri]
        while parent[rj] != rj:
            rj = parent[rj]
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([_root(parent, k) for k in range(len(points))])
    uniq, inverse = np.unique(roots, return_inverse=True)
    return points[uniq], inverse


def _root(parent, k):
    while parent[k] != k:
        k = parent[k]
    return k


@dataclass(eq=False)
class VisGraph:
    nodes: np.ndarray
    adjacency: csr_matrix
    spacing: float
    edges: np.ndarray  # boundary edges of the feasible space
    n_boundary: int
    query_index: dict = field(default_factory=dict)
    labels: np.ndarray | None = None
    _memo: dict = field(default_factory=dict, repr=False)
    _pred: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def edge_list(self):
        coo = self.adjacency.tocoo()
        keep = coo.row < coo.col
        return coo.row[keep], coo.col[keep], coo.data[keep]

    def index_of(self, p):
        """Node index of a registered point, or ``None``."""
        key = _key(p)
        if key in self.query_index:
            return self.query_index[key]
        d, k = self._tree.query(np.asarray(p, dtype=float))
        return int(k) if d <= EPS_GEOM else None

    @property
    def _tree(self):
        tree = self.__dict__.get("_kdtree")
        if tree is None:
            tree = cKDTree(self.nodes)
            self.__dict__["_kdtree"] = tree
        return tree

    def visible(self, p, q) -> bool:
        return bool(kernels.segments_inside([p], [q], self.edges, EPS_GEOM)[0])

    def distances_from(self, sources) -> np.ndarray:
        """Shortest-path distances from node indices ``sources`` to every node."""
        return dijkstra(self.adjacency, directed=False, indices=np.asarray(sources, dtype=int))

    def _predecessors(self, source: int) -> np.ndarray:
        with self._lock:
            pred = self._pred.get(source)
        if pred is None:
            _, pred = dijkstra(self.adjacency, directed=False, indices=source, return_predecessors=True)
            with self._lock:
                self._pred[source] = pred
        return pred

    def _check_reachable(self, ia, ib, a, b):
        if self.labels[ia] != self.labels[ib]:
            comps = _feasible_components(self, np.array([a, b]))
            raise UnreachableError(
                f"points {tuple(np.round(a, 6))} and {tuple(np.round(b, 6))} lie in different "
                f"components of the feasible space ({comps[0]} and {comps[1]})",
                components=tuple(comps),
            )


def _key(p):
    return (float(p[0]), float(p[1]))


def _feasible_components(g: VisGraph, pts):
    # one label per feasible component via the graph's connectivity
    out = []
    for p in pts:
        k = g.index_of(p)
        out.append(int(g.labels[k]) if k is not None else -1)
    return out


def build_graph(ws, extra_nodes=(), spacing: float | None = None) -> VisGraph:
    """Visibility graph of ``ws`` with ``extra_nodes`` registered as query points."""
    if spacing is None:
        spacing = ws.swath_width if getattr(ws, "swath_width", None) else 1.0
    if spacing <= 0:
        raise ValueError("sample spacing must be positive")
    edges = ws.edges
    rings = [r for comp in ws.feasible for r in comp.rings]
    vertices = np.vstack(rings)
    samples = np.vstack([_ring_samples(r, spacing) for r in rings])
    extra = np.asarray(extra_nodes, dtype=float).reshape(-1, 2)
    if len(extra):
        loc = kernels.classify_points(extra, edges, EPS_GEOM)
        bad = np.flatnonzero(loc == kernels.OUTSIDE)
        if len(bad):
            p = extra[bad[0]]
            raise InfeasibleNodeError(f"query point ({p[0]:.6f}, {p[1]:.6f}) lies outside the feasible space",
                                      point=tuple(map(float, p)))
    base = np.vstack([vertices, samples])
    allpts = np.vstack([base, extra])
    nodes, inverse = _merge_duplicates(allpts, EPS_GEOM)
    n_boundary = int(inverse[: len(base)].max()) + 1 if len(base) else 0

    vis = kernels.visibility_matrix(nodes, edges, EPS_GEOM)
    i, j = np.nonzero(np.triu(vis, 1))
    w = np.hypot(*(nodes[i] - nodes[j]).T)
    # zero weights would vanish from the sparse matrix; duplicates were merged above
    adjacency = csr_matrix((np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                           shape=(len(nodes), len(nodes)))
    _, labels = connected_components(adjacency, directed=False)
    query_index = {_key(p): int(inverse[len(base) + k]) for k, p in enumerate(extra)}
    return VisGraph(nodes, adjacency, float(spacing), edges, n_boundary, query_index, labels)


def shortest_path(g: VisGraph, a, b) -> tuple[np.ndarray, float]:
    """Shortest collision-free polyline from ``a`` to ``b`` and its length.

    Uses the straight segment when it stays inside the feasible space;
    otherwise searches the graph, attaching unregistered endpoints on the fly.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    direct = math.hypot(*(b - a))
    if direct <= EPS_GEOM:
        return a[None, :].copy(), 0.0
    if g.visible(a, b):
        return np.array([a, b]), direct
    ia, ib = g.index_of(a), g.index_of(b)
    if ia is None or ib is None:
        return _path_via_attachment(g, a, b, ia, ib)
    g._check_reachable(ia, ib, a, b)
    pred = g._predecessors(ia)
    path = [ib]
    while path[-1] != ia:
        k = pred[path[-1]]
        if k < 0:
            raise UnreachableError("graph search failed to reach the target")
        path.append(int(k))
    pts = g.nodes[path[::-1]].copy()
    pts[0], pts[-1] = a, b
    return pts, float(np.hypot(*np.diff(pts, axis=0).T).sum())


def _attach(g: VisGraph, p):
    vis = kernels.segments_inside(np.broadcast_to(p, g.nodes.shape), g.nodes, g.edges, EPS_GEOM)
    idx = np.flatnonzero(vis)
    return idx, np.hypot(*(g.nodes[idx] - p).T)


def _endpoint_links(g, p, idx):
    if idx is not None:
        return np.array([idx]), np.array([0.0])
    if kernels.classify_points(p, g.edges, EPS_GEOM)[0] == kernels.OUTSIDE:
        raise InfeasibleNodeError("query point lies outside the feasible space", point=tuple(map(float, p)))
    return _attach(g, p)


def _path_via_attachment(g, a, b, ia, ib):
    src, src_w = _endpoint_links(g, a, ia)
    dst, dst_w = _endpoint_links(g, b, ib)
    if len(src) == 0 or len(dst) == 0:
        raise UnreachableError("query point sees no graph node")
    dist, pred = _multi_source(g, src, src_w)
    total = dist[dst] + dst_w
    k = int(np.argmin(total))
    if not np.isfinite(total[k]):
        raise UnreachableError(f"points {tuple(a)} and {tuple(b)} lie in different components of the feasible space")
    path = [int(dst[k])]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    pts = np.vstack([a, g.nodes[path[::-1]], b])
    keep = np.concatenate([[True], np.hypot(*np.diff(pts, axis=0).T) > EPS_GEOM])
    pts = pts[keep]
    return pts, float(np.hypot(*np.diff(pts, axis=0).T).sum())


def _multi_source(g, src, src_w):
    # super-source trick: an extra node wired to every source with its offset weight
    n = g.n_nodes
    rows = np.concatenate([np.full(len(src), n), src])
    cols = np.concatenate([src, np.full(len(src), n)])
    data = np.concatenate([src_w, src_w]) + 1e-300
    coo = g.adjacency.tocoo()
    aug = csr_matrix((np.concatenate([coo.data, data]),
                      (np.concatenate([coo.row, rows]), np.concatenate([coo.col, cols]))), shape=(n + 1, n + 1))
    dist, pred = dijkstra(aug, directed=False, indices=n, return_predecessors=True)
    pred = pred[:n].copy()
    pred[pred == n] = -9999
    return dist[:n], pred


def transition_distance(g: VisGraph, a, b) -> float:
    """Length of :func:`shortest_path`, memoised per unordered pair."""
    ka, kb = _key(a), _key(b)
    key = (ka, kb) if ka <= kb else (kb, ka)
    with g._lock:
        hit = g._memo.get(key)
    if hit is not None:
        return hit
    # always search from the canonical end so d(a, b) == d(b, a) bit for bit
    _, length = shortest_path(g, key[0], key[1])
    with g._lock:
        g._memo[key] = length
    return length
