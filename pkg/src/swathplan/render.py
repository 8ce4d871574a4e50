"""Plain-text SVG figure of a coverage plan."""
from __future__ import annotations

import colorsys
import math
from html import escape

import numpy as np

MARGIN = 40.0  # px around the scenario bounding box
MAX_SIDE = 800.0  # px for the longer side of the bounding box
LEGEND_ROW = 18.0

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"]


def robot_color(r: int) -> str:
    if r < len(PALETTE):
        return PALETTE[r]
    h = (r * 0.618033988749895) % 1.0
    red, green, blue = colorsys.hls_to_rgb(h, 0.45, 0.65)
    return "#%02x%02x%02x" % (round(255 * red), round(255 * green), round(255 * blue))


def scenario_bounds(ws) -> tuple[float, float, float, float]:
    boxes = [ws.roi.bounds] + [o.bounds for o in ws.obstacles]
    b = np.array(boxes, dtype=float)
    return float(b[:, 0].min()), float(b[:, 1].min()), float(b[:, 2].max()), float(b[:, 3].max())


def _nice_length(target: float) -> float:
    if target <= 0:
        return 1.0
    mag = 10 ** math.floor(math.log10(target))
    for step in (5, 2, 1):
        if step * mag <= target:
            return step * mag
    return mag


class _Canvas:
    def __init__(self, bounds):
        x0, y0, x1, y1 = bounds
        span = max(x1 - x0, y1 - y0, 1e-9)
        self.scale = MAX_SIDE / span
        self.x0, self.y1 = x0, y1
        self.width = (x1 - x0) * self.scale + 2 * MARGIN
        self.height = (y1 - y0) * self.scale + 2 * MARGIN

    def xy(self, pts) -> str:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        px = MARGIN + (pts[:, 0] - self.x0) * self.scale
        py = MARGIN + (self.y1 - pts[:, 1]) * self.scale
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))

    def path(self, rings) -> str:
        return " ".join(f"M {self.xy(r)} Z" for r in rings)


def render_svg(plans, ws, title: str | None = None) -> str:
    """SVG of field, exclusion zones, feasible boundary and per-robot paths.

    The drawing area is the scenario bounding box scaled to ``MAX_SIDE`` px
    plus ``MARGIN`` px on every side; legend and scale bar sit below it.
    """
    bounds = scenario_bounds(ws)
    cv = _Canvas(bounds)
    active = [p for p in plans if len(p.waypoints) > 1]
    entries = [("field", "#f4f1e8", "#555555"), ("exclusion zone", "#bbbbbb", "#666666"),
               ("feasible boundary", "none", "#2a7a2a")]
    entries += [(f"robot {p.robot_id} ({p.length / 1000:.3f} km)", "none", robot_color(p.robot_id)) for p in active]
    legend_h = LEGEND_ROW * (len(entries) + 2)
    total_h = cv.height + legend_h
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cv.width:.3f}" height="{total_h:.3f}" '
        f'viewBox="0 0 {cv.width:.3f} {total_h:.3f}" data-scale="{cv.scale!r}" data-margin="{MARGIN!r}" '
        f'data-bbox="{bounds[0]!r} {bounds[1]!r} {bounds[2]!r} {bounds[3]!r}">',
        f'<rect x="0" y="0" width="{cv.width:.3f}" height="{total_h:.3f}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    out.append(f'<path class="roi" d="{cv.path(ws.roi.rings)}" fill="#f4f1e8" stroke="#555555" '
               f'stroke-width="1.5" fill-rule="evenodd"/>')
    for k, ob in enumerate(ws.obstacles):
        out.append(f'<path class="nfz" data-index="{k}" d="{cv.path(ob.rings)}" fill="#bbbbbb" '
                   f'fill-opacity="0.8" stroke="#666666" stroke-width="1" fill-rule="evenodd"/>')
    for comp in ws.feasible:
        out.append(f'<path class="feasible" d="{cv.path(comp.rings)}" fill="none" stroke="#2a7a2a" '
                   f'stroke-width="1" stroke-dasharray="4 3"/>')
    for p in active:
        out.append(f'<polyline class="robot" data-robot="{p.robot_id}" points="{cv.xy(p.waypoints)}" fill="none" '
                   f'stroke="{robot_color(p.robot_id)}" stroke-width="1.6" stroke-linejoin="round"/>')
    depots = {tuple(np.round(p.waypoints[0], 9)) for p in active}
    for d in sorted(depots):
        x, y = cv.xy([d]).split(",")
        out.append(f'<circle class="depot" cx="{x}" cy="{y}" r="4" fill="black"/>')

    # scale bar
    bar_m = _nice_length((bounds[2] - bounds[0]) / 5.0)
    bar_px = bar_m * cv.scale
    ybar = cv.height + LEGEND_ROW * 0.5
    out.append(f'<g class="scalebar"><line x1="{MARGIN:.3f}" y1="{ybar:.3f}" x2="{MARGIN + bar_px:.3f}" '
               f'y2="{ybar:.3f}" stroke="black" stroke-width="2"/>'
               f'<text x="{MARGIN + bar_px + 6:.3f}" y="{ybar + 4:.3f}" font-family="sans-serif" '
               f'font-size="11">{bar_m:g} m</text></g>')
    # legend
    out.append('<g class="legend" font-family="sans-serif" font-size="11">')
    for k, (label, fill, stroke) in enumerate(entries):
        y = cv.height + LEGEND_ROW * (k + 1.5)
        out.append(f'<rect x="{MARGIN:.3f}" y="{y - 9:.3f}" width="14" height="10" fill="{fill}" '
                   f'stroke="{stroke}" stroke-width="2"/>'
                   f'<text x="{MARGIN + 20:.3f}" y="{y:.3f}">{escape(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
