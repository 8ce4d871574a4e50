"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``SWATHPLAN_PURE_NUMPY`` is not
set to a truthy value. Both paths implement identical semantics; the test
suite checks them against each other and ``benchmarks/bench_kernels.py``
times them.

Geometry enters the kernels as flat float64 arrays: points ``(m, 2)`` and
edges/segments ``(e, 4)`` laid out as ``(ax, ay, bx, by)``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


OUTSIDE = 0
INSIDE = 1
BOUNDARY = 2

_CHUNK = 1 << 21  # max elements in one (points x edges) temporary


def _env_pure_numpy():
    return os.environ.get("SWATHPLAN_PURE_NUMPY", "").strip().lower() in {"1", "true", "yes", "on"}


BACKEND = "numpy" if (_env_pure_numpy() or not HAVE_NUMBA) else "numba"


def set_backend(name):
    """Switch kernel backend at runtime ("numba" or "numpy"); returns the previous one."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    previous, BACKEND = BACKEND, name
    return previous


def _as_points(points):
    return np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 2))


def _as_edges(edges):
    return np.ascontiguousarray(np.asarray(edges, dtype=np.float64).reshape(-1, 4))


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _classify_one(px, py, edges, eps):
    inside = False
    best = np.inf
    for k in range(edges.shape[0]):
        ax = edges[k, 0]
        ay = edges[k, 1]
        bx = edges[k, 2]
        by = edges[k, 3]
        if (ay > py) != (by > py):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < xint:
                inside = not inside
        ex = bx - ax
        ey = by - ay
        ll = ex * ex + ey * ey
        if ll > 0.0:
            u = ((px - ax) * ex + (py - ay) * ey) / ll
            if u < 0.0:
                u = 0.0
            elif u > 1.0:
                u = 1.0
        else:
            u = 0.0
        qx = ax + u * ex - px
        qy = ay + u * ey - py
        d2 = qx * qx + qy * qy
        if d2 < best:
            best = d2
    if np.sqrt(best) <= eps:
        return BOUNDARY
    return INSIDE if inside else OUTSIDE


@njit(cache=True)
def _classify_nb(points, edges, eps):
    out = np.empty(points.shape[0], dtype=np.int8)
    for i in range(points.shape[0]):
        out[i] = _classify_one(points[i, 0], points[i, 1], edges, eps)
    return out


@njit(cache=True)
def _min_distance_nb(points, edges):
    out = np.empty(points.shape[0])
    for i in range(points.shape[0]):
        px = points[i, 0]
        py = points[i, 1]
        best = np.inf
        for k in range(edges.shape[0]):
            ax = edges[k, 0]
            ay = edges[k, 1]
            ex = edges[k, 2] - ax
            ey = edges[k, 3] - ay
            ll = ex * ex + ey * ey
            u = 0.0
            if ll > 0.0:
                u = ((px - ax) * ex + (py - ay) * ey) / ll
                u = min(max(u, 0.0), 1.0)
            qx = ax + u * ex - px
            qy = ay + u * ey - py
            d2 = qx * qx + qy * qy
            if d2 < best:
                best = d2
        out[i] = np.sqrt(best)
    return out


@njit(cache=True)
def _covered_nb(points, segs, radius):
    out = np.zeros(points.shape[0], dtype=np.bool_)
    r2 = radius * radius
    # per-segment bounding boxes, grown by the radius
    lo_x = np.minimum(segs[:, 0], segs[:, 2]) - radius
    hi_x = np.maximum(segs[:, 0], segs[:, 2]) + radius
    lo_y = np.minimum(segs[:, 1], segs[:, 3]) - radius
    hi_y = np.maximum(segs[:, 1], segs[:, 3]) + radius
    for i in range(points.shape[0]):
        px = points[i, 0]
        py = points[i, 1]
        for k in range(segs.shape[0]):
            if px < lo_x[k] or px > hi_x[k] or py < lo_y[k] or py > hi_y[k]:
                continue
            ax = segs[k, 0]
            ay = segs[k, 1]
            ex = segs[k, 2] - ax
            ey = segs[k, 3] - ay
            ll = ex * ex + ey * ey
            u = 0.0
            if ll > 0.0:
                u = ((px - ax) * ex + (py - ay) * ey) / ll
                u = min(max(u, 0.0), 1.0)
            qx = ax + u * ex - px
            qy = ay + u * ey - py
            if qx * qx + qy * qy <= r2:
                out[i] = True
                break
    return out


@njit(cache=True)
def _segment_inside_one(px, py, qx, qy, edges, eps, buf):
    dx = qx - px
    dy = qy - py
    length = np.sqrt(dx * dx + dy * dy)
    if length <= eps:
        return _classify_one(px, py, edges, eps) != OUTSIDE
    te = eps / length
    n = 0
    buf[n] = 0.0
    n += 1
    buf[n] = 1.0
    n += 1
    sx0 = min(px, qx) - eps
    sx1 = max(px, qx) + eps
    sy0 = min(py, qy) - eps
    sy1 = max(py, qy) + eps
    for k in range(edges.shape[0]):
        ax = edges[k, 0]
        ay = edges[k, 1]
        bx = edges[k, 2]
        by = edges[k, 3]
        if max(ax, bx) < sx0 or min(ax, bx) > sx1 or max(ay, by) < sy0 or min(ay, by) > sy1:
            continue
        ex = bx - ax
        ey = by - ay
        elen = np.sqrt(ex * ex + ey * ey)
        if elen <= 0.0:
            continue
        wx = ax - px
        wy = ay - py
        denom = dx * ey - dy * ex
        if abs(denom) > 1e-12 * length * elen:
            t = (wx * ey - wy * ex) / denom
            s = (wx * dy - wy * dx) / denom
            se = eps / elen
            if t < -te or t > 1.0 + te or s < -se or s > 1.0 + se:
                continue
            if t > te and t < 1.0 - te and s > se and s < 1.0 - se:
                return False
            buf[n] = min(max(t, 0.0), 1.0)
            n += 1
        else:
            if abs(wx * dy - wy * dx) / length > eps:
                continue
            ta = (wx * dx + wy * dy) / (length * length)
            tb = ((bx - px) * dx + (by - py) * dy) / (length * length)
            if ta >= 0.0 and ta <= 1.0:
                buf[n] = ta
                n += 1
            if tb >= 0.0 and tb <= 1.0:
                buf[n] = tb
                n += 1
    ts = np.sort(buf[:n])
    for i in range(n - 1):
        if (ts[i + 1] - ts[i]) * length <= eps:
            continue
        tm = 0.5 * (ts[i] + ts[i + 1])
        if _classify_one(px + tm * dx, py + tm * dy, edges, eps) == OUTSIDE:
            return False
    return True


@njit(cache=True)
def _segments_inside_nb(p, q, edges, eps):
    out = np.empty(p.shape[0], dtype=np.bool_)
    buf = np.empty(2 * edges.shape[0] + 2)
    for i in range(p.shape[0]):
        out[i] = _segment_inside_one(p[i, 0], p[i, 1], q[i, 0], q[i, 1], edges, eps, buf)
    return out


@njit(cache=True)
def _visibility_nb(nodes, edges, eps):
    n = nodes.shape[0]
    vis = np.zeros((n, n), dtype=np.bool_)
    buf = np.empty(2 * edges.shape[0] + 2)
    for i in range(n):
        vis[i, i] = True
        for j in range(i + 1, n):
            ok = _segment_inside_one(nodes[i, 0], nodes[i, 1], nodes[j, 0], nodes[j, 1], edges, eps, buf)
            vis[i, j] = ok
            vis[j, i] = ok
    return vis


# ---------------------------------------------------------------------------
# numpy fallbacks


def _point_edge_dist2(px, py, edges):
    # px, py: (m,) -> (m, e) squared distances
    ax, ay = edges[:, 0][None, :], edges[:, 1][None, :]
    ex = edges[:, 2][None, :] - ax
    ey = edges[:, 3][None, :] - ay
    ll = ex * ex + ey * ey
    with np.errstate(invalid="ignore", divide="ignore"):
        u = ((px[:, None] - ax) * ex + (py[:, None] - ay) * ey) / ll
    u = np.where(ll > 0.0, np.clip(u, 0.0, 1.0), 0.0)
    qx = ax + u * ex - px[:, None]
    qy = ay + u * ey - py[:, None]
    return qx * qx + qy * qy


def _classify_np(points, edges, eps):
    out = np.empty(len(points), dtype=np.int8)
    step = max(1, _CHUNK // max(1, len(edges)))
    ay, by = edges[:, 1][None, :], edges[:, 3][None, :]
    ax, bx = edges[:, 0][None, :], edges[:, 2][None, :]
    for lo in range(0, len(points), step):
        px = points[lo:lo + step, 0]
        py = points[lo:lo + step, 1]
        straddle = (ay > py[:, None]) != (by > py[:, None])
        with np.errstate(invalid="ignore", divide="ignore"):
            xint = ax + (py[:, None] - ay) * (bx - ax) / (by - ay)
        crossings = np.count_nonzero(straddle & (px[:, None] < xint), axis=1)
        dist = np.sqrt(_point_edge_dist2(px, py, edges).min(axis=1))
        cls = np.where(crossings % 2 == 1, INSIDE, OUTSIDE)
        out[lo:lo + step] = np.where(dist <= eps, BOUNDARY, cls)
    return out


def _min_distance_np(points, edges):
    out = np.empty(len(points))
    step = max(1, _CHUNK // max(1, len(edges)))
    for lo in range(0, len(points), step):
        chunk = points[lo:lo + step]
        out[lo:lo + step] = np.sqrt(_point_edge_dist2(chunk[:, 0], chunk[:, 1], edges).min(axis=1))
    return out


def _covered_np(points, segs, radius):
    out = np.zeros(len(points), dtype=bool)
    step = max(1, _CHUNK // max(1, len(segs)))
    r2 = radius * radius
    for lo in range(0, len(points), step):
        chunk = points[lo:lo + step]
        out[lo:lo + step] = (_point_edge_dist2(chunk[:, 0], chunk[:, 1], segs) <= r2).any(axis=1)
    return out


def _segments_inside_np(p, q, edges, eps):
    m = len(p)
    if m == 0:
        return np.zeros(0, dtype=bool)
    result = np.ones(m, dtype=bool)
    step = max(1, _CHUNK // max(1, len(edges)))
    for lo in range(0, m, step):
        result[lo:lo + step] = _segments_inside_block(p[lo:lo + step], q[lo:lo + step], edges, eps)
    return result


def _segments_inside_block(p, q, edges, eps):
    m = len(p)
    d = q - p
    length = np.hypot(d[:, 0], d[:, 1])
    ok = np.ones(m, dtype=bool)

    short = length <= eps
    if short.any():
        ok[short] = _classify_np(p[short], edges, eps) != OUTSIDE

    ax, ay = edges[:, 0][None, :], edges[:, 1][None, :]
    ex = (edges[:, 2] - edges[:, 0])[None, :]
    ey = (edges[:, 3] - edges[:, 1])[None, :]
    elen = np.hypot(ex, ey)
    dx, dy = d[:, 0][:, None], d[:, 1][:, None]
    wx = ax - p[:, 0][:, None]
    wy = ay - p[:, 1][:, None]
    L = np.where(short, 1.0, length)[:, None]

    denom = dx * ey - dy * ex
    nonpar = np.abs(denom) > 1e-12 * L * elen
    with np.errstate(invalid="ignore", divide="ignore"):
        t = (wx * ey - wy * ex) / denom
        s = (wx * dy - wy * dx) / denom
        se = eps / elen
    te = eps / L
    valid_edge = elen > 0.0
    hit = nonpar & valid_edge & (t >= -te) & (t <= 1.0 + te) & (s >= -se) & (s <= 1.0 + se)
    proper = hit & (t > te) & (t < 1.0 - te) & (s > se) & (s < 1.0 - se)
    ok &= ~proper.any(axis=1) | short

    collinear = ~nonpar & valid_edge & (np.abs(wx * dy - wy * dx) / L <= eps)
    ta = (wx * dx + wy * dy) / (L * L)
    tb = ((wx + ex) * dx + (wy + ey) * dy) / (L * L)

    live = ok & ~short
    rows = [np.flatnonzero(live), np.flatnonzero(live)]
    vals = [np.zeros(live.sum()), np.ones(live.sum())]
    hit &= live[:, None]
    r, c = np.nonzero(hit)
    rows.append(r)
    vals.append(np.clip(t[r, c], 0.0, 1.0))
    for tt in (ta, tb):
        sel = collinear & live[:, None] & (tt >= 0.0) & (tt <= 1.0)
        r, c = np.nonzero(sel)
        rows.append(r)
        vals.append(tt[r, c])
    rows = np.concatenate(rows)
    vals = np.concatenate(vals)
    order = np.lexsort((vals, rows))
    rows, vals = rows[order], vals[order]
    same = rows[1:] == rows[:-1]
    gap = (vals[1:] - vals[:-1]) * length[rows[:-1]]
    pick = same & (gap > eps)
    if pick.any():
        rr = rows[:-1][pick]
        tm = 0.5 * (vals[:-1][pick] + vals[1:][pick])
        mids = p[rr] + tm[:, None] * d[rr]
        outside = _classify_np(mids, edges, eps) == OUTSIDE
        ok[rr[outside]] = False
    return ok


def _visibility_np(nodes, edges, eps):
    n = len(nodes)
    vis = np.eye(n, dtype=bool)
    for i in range(n - 1):
        targets = nodes[i + 1:]
        src = np.broadcast_to(nodes[i], targets.shape)
        row = _segments_inside_np(np.ascontiguousarray(src), targets, edges, eps)
        vis[i, i + 1:] = row
        vis[i + 1:, i] = row
    return vis


# ---------------------------------------------------------------------------
# dispatchers


def classify_points(points, edges, eps):
    """Even-odd classification of points against ring edges.

    Returns an int8 array of OUTSIDE / INSIDE / BOUNDARY codes; a point within
    ``eps`` of any edge is BOUNDARY regardless of parity.
    """
    points, edges = _as_points(points), _as_edges(edges)
    if len(edges) == 0:
        return np.zeros(len(points), dtype=np.int8)
    if BACKEND == "numba":
        return _classify_nb(points, edges, float(eps))
    return _classify_np(points, edges, float(eps))


def min_distance(points, edges):
    """Distance from each point to the nearest edge."""
    points, edges = _as_points(points), _as_edges(edges)
    if len(edges) == 0:
        return np.full(len(points), np.inf)
    if BACKEND == "numba":
        return _min_distance_nb(points, edges)
    return _min_distance_np(points, edges)


def covered_mask(points, segments, radius):
    """True where a point lies within ``radius`` of at least one segment."""
    points, segments = _as_points(points), _as_edges(segments)
    if len(segments) == 0:
        return np.zeros(len(points), dtype=bool)
    if BACKEND == "numba":
        return _covered_nb(points, segments, float(radius))
    return _covered_np(points, segments, float(radius))


def segments_inside(p, q, edges, eps):
    """For each segment ``p[i] -> q[i]``, whether it lies in the closed region bounded by ``edges``."""
    p, q, edges = _as_points(p), _as_points(q), _as_edges(edges)
    if BACKEND == "numba":
        return _segments_inside_nb(p, q, edges, float(eps))
    return _segments_inside_np(p, q, edges, float(eps))


def visibility_matrix(nodes, edges, eps):
    """Symmetric boolean matrix of mutually visible node pairs inside the closed region."""
    nodes, edges = _as_points(nodes), _as_edges(edges)
    if BACKEND == "numba":
        return _visibility_nb(nodes, edges, float(eps))
    return _visibility_np(nodes, edges, float(eps))
