"""Scenario files: GeoJSON geometry plus a flat JSON parameter sidecar.

The geometry file is a FeatureCollection. The first Polygon feature with
``properties.role == "roi"`` is the field; every ``role == "nfz"`` feature
(Polygon or MultiPolygon) is an exclusion zone. Numeric parameters come from
``<stem>.params.json`` next to the geometry file, or from a top-level
``"params"`` member of the collection; the sidecar wins.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidPolygonError, ScenarioError
from .geom import Polygon, ring_signed_area
from .orientation import STRATEGIES, orientation_min_width
from .workspace import to_shapely

log = logging.getLogger(__name__)

PARAM_KEYS = {"name", "swath_width", "buffer_scale", "n_robots", "depot", "orientation", "seed",
              "vg_spacing", "energy_model"}


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    roi: Polygon
    obstacles: tuple = ()
    swath_width: float = 10.0
    buffer_scale: float = 1.0
    n_robots: int = 3
    depot: tuple | None = None
    orientation: str = "minwidth"
    seed: int = 0
    vg_spacing: float | None = None
    energy_model: dict = field(default_factory=dict)
    warnings: tuple = ()
    source: str | None = None

    def __post_init__(self):
        if not (self.swath_width > 0 and math.isfinite(self.swath_width)):
            raise ScenarioError(f"swath_width must be positive, got {self.swath_width}")
        if int(self.n_robots) != self.n_robots or self.n_robots < 1:
            raise ScenarioError(f"n_robots must be a positive integer, got {self.n_robots}")
        if not self.buffer_scale >= 0:
            raise ScenarioError(f"buffer_scale must be non-negative, got {self.buffer_scale}")
        if self.orientation not in STRATEGIES:
            raise ScenarioError(f"unknown orientation {self.orientation!r}; choose from {sorted(STRATEGIES)}")
        if self.vg_spacing is not None and not self.vg_spacing > 0:
            raise ScenarioError("vg_spacing must be positive")
        if self.depot is not None and len(self.depot) != 2:
            raise ScenarioError("depot must be an (x, y) pair")

    @property
    def headland(self) -> float:
        return self.buffer_scale * self.swath_width

    def with_params(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _parse_ring(coords, feature, what):
    try:
        arr = np.asarray(coords, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed {what} coordinates ({exc})", feature=feature) from None
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ScenarioError(f"{what} must be a list of [x, y] positions", feature=feature)
    arr = arr[:, :2]
    if not np.all(np.isfinite(arr)):
        raise ScenarioError(f"{what} has non-finite coordinates", feature=feature)
    if len(arr) < 4 or not np.array_equal(arr[0], arr[-1]):
        # GeoJSON rings are closed; accept open rings with at least 3 vertices
        if len(arr) < 3:
            raise ScenarioError(f"{what} needs at least 3 distinct positions", feature=feature)
    return arr


def _parse_polygon(coords, feature, warnings, role):
    if not isinstance(coords, list) or not coords:
        raise ScenarioError("Polygon coordinates must be a non-empty list of rings", feature=feature)
    rings = [_parse_ring(r, feature, "exterior ring" if k == 0 else f"hole {k - 1}")
             for k, r in enumerate(coords)]
    if ring_signed_area(rings[0]) < 0:
        msg = f"feature {feature} ({role}): clockwise exterior ring normalized to counter-clockwise"
        warnings.append(msg)
        log.warning(msg)
    try:
        return Polygon(rings[0], rings[1:])
    except InvalidPolygonError as exc:
        raise ScenarioError(f"invalid polygon: {exc}", feature=feature) from None


def _geometry_polygons(feat, k, warnings, role):
    geom = feat.get("geometry")
    if not isinstance(geom, dict):
        raise ScenarioError("missing geometry", feature=k)
    kind = geom.get("type")
    coords = geom.get("coordinates")
    if kind == "Polygon":
        return [_parse_polygon(coords, k, warnings, role)]
    if kind == "MultiPolygon" and role == "nfz":
        if not isinstance(coords, list) or not coords:
            raise ScenarioError("MultiPolygon coordinates must be a non-empty list", feature=k)
        return [_parse_polygon(c, k, warnings, role) for c in coords]
    raise ScenarioError(f"{role} geometry must be a Polygon, got {kind!r}", feature=k)


def parse_feature_collection(doc, params=None, name="scenario", source=None) -> Scenario:
    """Build a :class:`Scenario` from an already-decoded GeoJSON document."""
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ScenarioError("top-level object must be a GeoJSON FeatureCollection")
    feats = doc.get("features")
    if not isinstance(feats, list):
        raise ScenarioError("FeatureCollection has no 'features' list")
    warnings = []
    roi = roi_index = None
    obstacles = []
    for k, feat in enumerate(feats):
        if not isinstance(feat, dict) or feat.get("type") != "Feature":
            raise ScenarioError("not a GeoJSON Feature", feature=k)
        role = (feat.get("properties") or {}).get("role")
        if role == "roi":
            if roi is not None:
                warnings.append(f"feature {k}: extra roi ignored (using feature {roi_index})")
                continue
            roi = _geometry_polygons(feat, k, warnings, "roi")[0]
            roi_index = k
        elif role == "nfz":
            obstacles.extend((k, p) for p in _geometry_polygons(feat, k, warnings, "nfz"))
    if roi is None:
        raise ScenarioError("no Polygon feature with role 'roi'")
    roi_s = to_shapely(roi)
    for k, ob in obstacles:
        if not roi_s.intersects(to_shapely(ob)) or roi_s.intersection(to_shapely(ob)).area <= 0:
            raise ScenarioError("exclusion zone does not overlap the roi", feature=k)

    merged = dict(doc.get("params") or {})
    merged.update(params or {})
    unknown = set(merged) - PARAM_KEYS
    if unknown:
        raise ScenarioError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    if "swath_width" not in merged:
        # scale-aware fallback: a tenth of the field's narrowest extent
        merged["swath_width"] = round(orientation_min_width(roi).height / 10.0, 6)
        warnings.append(f"swath_width not given; using {merged['swath_width']:g} m")
    try:
        return Scenario(
            name=str(merged.get("name", name)),
            roi=roi,
            obstacles=tuple(p for _, p in obstacles),
            swath_width=float(merged["swath_width"]),
            buffer_scale=float(merged.get("buffer_scale", 1.0)),
            n_robots=int(merged.get("n_robots", 3)),
            depot=None if merged.get("depot") is None else tuple(float(c) for c in merged["depot"]),
            orientation=str(merged.get("orientation", "minwidth")),
            seed=int(merged.get("seed", 0)),
            vg_spacing=None if merged.get("vg_spacing") is None else float(merged["vg_spacing"]),
            energy_model=dict(merged.get("energy_model") or {}),
            warnings=tuple(warnings),
            source=source,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad parameter value: {exc}") from None


def _read_json(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path.name}: JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name.split(".")[0] + ".params.json")


def load_scenario(path, **overrides) -> Scenario:
    """Read a scenario from ``path`` (GeoJSON) and its optional parameter sidecar."""
    path = Path(path)
    doc = _read_json(path)
    side = sidecar_path(path)
    params = _read_json(side) if side.exists() and side != path else {}
    if not isinstance(params, dict):
        raise ScenarioError(f"{side.name}: parameters must be a JSON object")
    params.update({k: v for k, v in overrides.items() if v is not None})
    return parse_feature_collection(doc, params, name=path.name.split(".")[0], source=str(path))


def scenario_geojson(roi: Polygon, obstacles=(), params=None) -> dict:
    """GeoJSON FeatureCollection for a field and its exclusion zones."""
    def rings(p):
        return [np.vstack([r, r[:1]]).tolist() for r in p.rings]

    feats = [{"type": "Feature", "properties": {"role": "roi"},
              "geometry": {"type": "Polygon", "coordinates": rings(roi)}}]
    feats += [{"type": "Feature", "properties": {"role": "nfz", "id": k},
               "geometry": {"type": "Polygon", "coordinates": rings(o)}} for k, o in enumerate(obstacles)]
    doc = {"type": "FeatureCollection", "features": feats}
    if params:
        doc["params"] = dict(params)
    return doc


def bundled_names() -> list[str]:
    root = resources.files("swathplan") / "scenarios"
    return sorted(p.name[: -len(".geojson")] for p in root.iterdir() if p.name.endswith(".geojson"))


def bundled_path(name: str) -> Path:
    p = Path(str(resources.files("swathplan") / "scenarios" / f"{name}.geojson"))
    if not p.exists():
        raise ScenarioError(f"no bundled scenario named {name!r}; available: {', '.join(bundled_names())}")
    return p


def load_bundled(name: str, **overrides) -> Scenario:
    return load_scenario(bundled_path(name), **overrides)


def resolve(spec: str, **overrides) -> Scenario:
    """Load a scenario by file path, falling back to a bundled name."""
    p = Path(spec)
    if p.exists():
        return load_scenario(p, **overrides)
    if p.suffix == "" and spec in bundled_names():
        return load_bundled(spec, **overrides)
    raise ScenarioError(f"scenario file {spec} not found")

