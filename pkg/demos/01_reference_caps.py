"""Half-plane reference droplets.

Tabulates the optimal unit-area energy psi(tau) of the planar cap, checks that
the anisotropic perimeter built from the cap's support function reproduces it,
and writes the caps for a few adhesion coefficients as SVG.
"""

from pathlib import Path

import numpy as np

from capdrop.energy import half_space_energy
from capdrop.io import atomic_write, droplet_svg
from capdrop.sessile import CapGeometry, IdealDroplet, anisotropic_energy, cap_scalars, ideal_droplet_boundary

OUT = Path(__file__).with_name("output")

print(f"{'tau':>6} {'volume':>9} {'psi':>9} {'psi_prime':>10}")
for tau in np.linspace(-0.9, 0.9, 7).round(12) + 0.0:
    s = cap_scalars(CapGeometry(2, tau))
    print(f"{tau:6.2f} {s.volume:9.5f} {s.psi:9.5f} {s.psi_prime:10.5f}")

# psi increases with tau: a wettable wall (tau < 0) makes flat, cheap drops
for tau in (-0.6, 0.0, 0.6):
    g = CapGeometry(2, tau)
    k = ideal_droplet_boundary(IdealDroplet(g), 4096)
    print(f"tau={tau:+.1f}: capillary energy {half_space_energy(k, tau):.8f}, "
          f"anisotropic perimeter {anisotropic_energy(g, k):.8f}, psi {cap_scalars(g).psi:.8f}")
    atomic_write(OUT / f"cap_tau{tau:+.1f}.svg", droplet_svg(k))

print(f"SVG files written to {OUT}")
