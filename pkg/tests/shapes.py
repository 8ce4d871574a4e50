"""Random test geometry."""
import math

import numpy as np

from swathplan.geom import Polygon


def star_ring(rng, n, r_lo=0.4, r_hi=1.0, center=(0.0, 0.0), scale=1.0):
    """Simple star-shaped ring: one jittered angle per sector, random radii."""
    # every sector spans < pi, so the ring stays star-shaped about the centre
    ang = (np.arange(n) + rng.uniform(0.1, 0.9, n)) * (2 * math.pi / n)
    rad = rng.uniform(r_lo, r_hi, len(ang)) * scale
    return np.column_stack([center[0] + rad * np.cos(ang), center[1] + rad * np.sin(ang)])


def star_polygon(rng, n, **kw):
    return Polygon(star_ring(rng, n, **kw))


def u_shape(width=3.0, height=3.0, arm=1.0, notch=2.0):
    return Polygon([(0, 0), (width, 0), (width, height), (width - arm, height), (width - arm, height - notch),
                    (arm, height - notch), (arm, height), (0, height)])


L_SHAPE = [(0, 0), (4, 0), (4, 1), (1, 1), (1, 3), (0, 3)]
