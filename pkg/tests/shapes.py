"""Random test shapes shared by several test modules."""

import math

import numpy as np

from capdrop.geometry import PolyDroplet


def random_half_plane_polygon(rng):
    # base on the wall plus a star-shaped upper chain around the base midpoint
    k = int(rng.integers(3, 30))
    a, b = -rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5)
    ang = np.sort(rng.uniform(0.05, math.pi - 0.05, k))
    rad = rng.uniform(0.3, 2.0, k)
    mid = 0.5 * (a + b)
    upper = np.column_stack([mid + rad * np.cos(ang), rad * np.sin(ang)])
    base_n = int(rng.integers(2, 6))
    base = np.column_stack([np.linspace(a, b, base_n), np.zeros(base_n)])
    v = np.vstack([base, upper])
    contact = np.r_[np.ones(base_n, bool), np.zeros(k, bool)]
    return PolyDroplet(v, contact, np.r_[base[:, 0], np.full(k, np.nan)], validate=False)
