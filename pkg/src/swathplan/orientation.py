"""Sweep-frame selection.

A sweep frame is an orthonormal pair ``(u, v)``: swaths run along ``u`` and
are stacked along ``v``. Angles live in ``[0, pi)`` because a sweep direction
and its reverse describe the same set of swaths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateGeometryError
from .geom import EPS_GEOM, Polygon, convex_hull, region_vertices

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SweepFrame:
    u: np.ndarray
    v: np.ndarray
    width: float  # extent along u
    height: float  # extent along v
    u_min: float = 0.0
    v_min: float = 0.0
    strategy: str = ""
    fallback: bool = False

    @property
    def angle(self) -> float:
        return _norm_angle(math.atan2(self.u[1], self.u[0]))

    @property
    def area(self) -> float:
        return self.width * self.height

    def project(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return pts @ self.u, pts @ self.v

    def corners(self):
        """Rectangle corners in world coordinates, counter-clockwise."""
        u, v = self.u, self.v
        lo_u, hi_u = self.u_min, self.u_min + self.width
        lo_v, hi_v = self.v_min, self.v_min + self.height
        return np.array([lo_u * u + lo_v * v, hi_u * u + lo_v * v, hi_u * u + hi_v * v, lo_u * u + hi_v * v])


@dataclass(frozen=True)
class OrientationStrategy:
    """One of ``mar``, ``scan``, ``pca`` or ``minwidth``."""

    kind: str = "minwidth"
    step: float = math.pi / 180
    range: float = math.pi

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown orientation strategy {self.kind!r}; choose from {sorted(STRATEGIES)}")
        if self.kind == "scan" and not (0 < self.step <= math.pi / 36):
            raise ValueError("angle-search step must lie in (0, pi/36]")
        if self.kind == "scan" and not (0 < self.range <= math.pi):
            raise ValueError("angle-search range must lie in (0, pi]")


def _norm_angle(theta):
    a = math.fmod(theta, math.pi)
    if a < 0:
        a += math.pi
    if a >= math.pi - 1e-15:
        a = 0.0
    return a


def frame_at(points, theta, strategy="", fallback=False, normalize=True) -> SweepFrame:
    """Tight frame with ``u`` at angle ``theta`` around the given points.

    ``theta`` is folded into ``[0, pi)`` unless ``normalize`` is false.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if normalize:
        theta = _norm_angle(theta)
    u = np.array([math.cos(theta), math.sin(theta)])
    v = np.array([-u[1], u[0]])
    pu, pv = pts @ u, pts @ v
    return SweepFrame(u, v, float(pu.max() - pu.min()), float(pv.max() - pv.min()),
                      float(pu.min()), float(pv.min()), strategy, fallback)


def _points(region):
    if isinstance(region, Polygon) or isinstance(region, (list, tuple)):
        return region_vertices(region)
    return np.asarray(region, dtype=float).reshape(-1, 2)


def caliper_sweep(hull: np.ndarray):
    """Rotating calipers over a CCW convex hull.

    For every hull edge returns the edge angle and the extents of the hull
    along the edge direction and along its inward normal. Support pointers
    only ever move forward, so the sweep is linear in the hull size.
    """
    h = np.asarray(hull, dtype=float)
    n = len(h)
    edges = np.roll(h, -1, axis=0) - h
    lens = np.hypot(edges[:, 0], edges[:, 1])
    dirs = edges / lens[:, None]
    normals = np.column_stack([-dirs[:, 1], dirs[:, 0]])  # inward for CCW

    angles = np.empty(n)
    along = np.empty(n)
    across = np.empty(n)

    d0, n0 = dirs[0], normals[0]
    hi = int(np.argmax(h @ d0))
    top = int(np.argmax(h @ n0))
    lo = int(np.argmin(h @ d0))
    for i in range(n):
        d, nrm = dirs[i], normals[i]
        # advance each caliper while the next vertex is further along its direction
        for _ in range(n):
            if (h[(hi + 1) % n] - h[hi]) @ d > EPS_GEOM:
                hi = (hi + 1) % n
            else:
                break
        for _ in range(n):
            if (h[(top + 1) % n] - h[top]) @ nrm > EPS_GEOM:
                top = (top + 1) % n
            else:
                break
        for _ in range(n):
            if (h[(lo + 1) % n] - h[lo]) @ d < -EPS_GEOM:
                lo = (lo + 1) % n
            else:
                break
        angles[i] = math.atan2(d[1], d[0])
        along[i] = (h[hi] - h[lo]) @ d
        across[i] = (h[top] - h[i]) @ nrm
    return angles, along, across


def _pick(values, angles):
    """Index of the minimum value; ties broken by the smallest angle in [0, pi)."""
    best = values.min()
    ties = np.flatnonzero(values <= best + TIE_RTOL * max(abs(best), 1.0))
    return min(ties, key=lambda k: angles[k])


def _hull(points):
    return convex_hull(points).exterior


def min_area_rect(region) -> SweepFrame:
    """Minimum-area enclosing rectangle; ``u`` follows its longer side."""
    pts = _points(region)
    hull = _hull(pts)
    angles, along, across = caliper_sweep(hull)
    areas = along * across
    major = np.where(along >= across, angles, angles + math.pi / 2)
    norm = np.array([_norm_angle(a) for a in major])
    k = _pick(areas, norm)
    return frame_at(pts, norm[k], "mar")


def orientation_min_width(region) -> SweepFrame:
    """Frame whose extent along ``v`` is the polygon's minimum width."""
    pts = _points(region)
    hull = _hull(pts)
    angles, _, across = caliper_sweep(hull)
    norm = np.array([_norm_angle(a) for a in angles])
    k = _pick(across, norm)
    return frame_at(pts, norm[k], "minwidth")


def projected_height(points, frame: SweepFrame) -> float:
    return frame.height


def orientation_by_scan(region, step: float = math.pi / 180,
                        objective: Callable | None = None, span: float = math.pi) -> SweepFrame:
    """Best frame over the angle grid ``0, step, 2*step, ... < span``.

    ``objective(points, frame)`` defaults to the projected height, a proxy
    for the number of swaths.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    objective = objective or projected_height
    pts = _points(region)
    count = int(math.ceil(span / step - 1e-9))
    best, best_frame = math.inf, None
    for k in range(count):
        theta = k * step
        if theta >= math.pi:
            break
        frame = frame_at(pts, theta, "scan")
        val = objective(pts, frame)
        # strict improvement beyond the tie tolerance keeps the smallest angle
        if best_frame is None or val < best - TIE_RTOL * max(abs(best), 1.0):
            best, best_frame = val, frame
    return best_frame


def orientation_by_pca(region) -> SweepFrame:
    """Principal axis of the vertex cloud; falls back to MAR when isotropic."""
    pts = _points(region)
    if len(pts) < 3:
        raise DegenerateGeometryError("PCA orientation needs at least 3 vertices")
    cov = np.cov(pts.T, bias=True)
    vals, vecs = np.linalg.eigh(cov)
    if vals[1] <= 0:
        raise DegenerateGeometryError("vertex cloud has no spread")
    if (vals[1] - vals[0]) / vals[1] < 1e-12:
        mar = min_area_rect(pts)
        return frame_at(pts, mar.angle, "pca", fallback=True)
    u = vecs[:, 1]
    if u[0] < 0 or (u[0] == 0 and u[1] < 0):
        u = -u
    # keep the sign convention on u; the reported angle is still folded into [0, pi)
    return frame_at(pts, math.atan2(u[1], u[0]), "pca", normalize=False)


STRATEGIES = {"mar", "scan", "pca", "minwidth"}


def compute_frame(region, strategy: OrientationStrategy | str = "minwidth") -> SweepFrame:
    if isinstance(strategy, str):
        strategy = OrientationStrategy(strategy)
    if strategy.kind == "mar":
        return min_area_rect(region)
    if strategy.kind == "scan":
        return orientation_by_scan(region, strategy.step, span=strategy.range)
    if strategy.kind == "pca":
        return orientation_by_pca(region)
    return orientation_min_width(region)
