"""Regenerate the bundled scenario files under src/swathplan/scenarios."""
import argparse
import json
from pathlib import Path

from swathplan.geom import Polygon
from swathplan.scenario import scenario_geojson

# Synthetic stand-ins, one per shape class.
SCENARIOS = {
    "rect": dict(
        roi=[(0, 0), (200, 0), (200, 120), (0, 120)],
        obstacles=[],
        params=dict(swath_width=8.0),
    ),
    "simple": dict(
        roi=[(0, 0), (215, -25), (270, 85), (175, 195), (15, 165)],
        obstacles=[],
        params=dict(swath_width=9.0),
    ),
    "cape": dict(
        roi=[(0, 0), (420, -30), (610, 40), (780, -10), (1010, 60), (1200, 10), (1170, 260),
             (1050, 300), (1120, 470), (980, 720), (760, 650), (640, 750), (420, 690),
             (380, 560), (250, 600), (60, 520), (120, 350), (-30, 220)],
        obstacles=[],
        params=dict(swath_width=31.0),
    ),
    "complex12": dict(
        roi=[(0, 0), (330, 0), (380, 90), (360, 290), (200, 320), (170, 240), (60, 300), (-20, 180)],
        obstacles=[[(140, 100), (220, 90), (250, 150), (190, 200), (130, 170)]],
        params=dict(swath_width=12.0),
    ),
    "complex22": dict(
        roi=[(0, 0), (520, -40), (700, 120), (660, 420), (420, 500), (300, 380), (120, 470), (-40, 260)],
        obstacles=[[(220, 140), (420, 140), (420, 320), (360, 320), (360, 200), (220, 200)]],
        params=dict(swath_width=22.0),
    ),
    "island": dict(
        roi=[(0, 0), (150, -15), (260, 30), (255, 170), (135, 215), (15, 185), (-15, 90)],
        obstacles=[[(95, 70), (150, 85), (165, 125), (120, 150), (85, 115)]],
        params=dict(swath_width=8.0),
    ),
    "wetland": dict(
        roi=[(0, 0), (160, 0), (200, 60), (250, 0), (420, 10), (470, 120), (400, 200), (460, 300),
             (330, 350), (250, 280), (170, 350), (30, 320), (60, 200), (-20, 110)],
        obstacles=[[(120, 110), (220, 100), (260, 160), (200, 230), (190, 160), (130, 180)],
                   [(320, 90), (380, 110), (360, 160)]],
        params=dict(swath_width=10.0),
    ),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/swathplan/scenarios"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in SCENARIOS.items():
        roi = Polygon(spec["roi"])
        obstacles = [Polygon(o) for o in spec["obstacles"]]
        (out / f"{name}.geojson").write_text(json.dumps(scenario_geojson(roi, obstacles), indent=1) + "\n")
        params = dict(name=name, buffer_scale=1.0, n_robots=3, orientation="minwidth", seed=0, **spec["params"])
        (out / f"{name}.params.json").write_text(json.dumps(params, indent=1, sort_keys=True) + "\n")
        print("wrote", name)


if __name__ == "__main__":
    main()
