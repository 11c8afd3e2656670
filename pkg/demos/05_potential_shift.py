"""A bulk potential does not choose the contact point.

Adding g = 10 x2 to the cosine-adhesion disk pulls the droplet downward, but
the shift of its contact point shrinks like sqrt(m): balancing
sqrt(m) psi(sigma(theta)) against 10 m sin(theta) to first order predicts
theta ~ -10 sqrt(m) / (0.2 psi'(0.3)).
"""

import math

import numpy as np

from capdrop import Container, MinimizeConfig, minimize
from capdrop.sessile import CapGeometry, psi_prime

sigma = lambda s: 0.3 + 0.2 * (1 - np.cos(s))  # noqa: E731
heavy = Container.disk(1.0, sigma=sigma, g=lambda p: 10.0 * p[..., 1])
slope = -10.0 / (0.2 * psi_prime(CapGeometry(2, 0.3)))

for m in (1e-4, 1e-5, 1e-6):
    r = minimize(heavy, MinimizeConfig(volume=m, vertex_count=256))
    theta = math.remainder(r.contact_param, 2 * math.pi)
    print(f"m={m:g}: contact angle {theta:+.5f}, theta/sqrt(m) {theta / math.sqrt(m):+.2f} (predicted {slope:+.2f})")
