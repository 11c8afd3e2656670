"""A small droplet inside a disk.

With a constant adhesion coefficient every wall point is equivalent, the
minimizer is a lens meeting the wall at the Young angle, and its energy
approaches psi(sigma) * sqrt(m) as the mass shrinks.
"""

import math
from pathlib import Path

from capdrop import Container, MinimizeConfig, minimize
from capdrop.io import atomic_write, droplet_svg
from capdrop.sessile import CapGeometry, psi

OUT = Path(__file__).with_name("output")
sigma = 0.5
disk = Container.disk(1.0, sigma=sigma)

for m in (1e-2, 1e-3):
    res = minimize(disk, MinimizeConfig(volume=m, vertex_count=512))
    flat = psi(CapGeometry(2, sigma)) * math.sqrt(m)
    print(f"m={m:g}: energy {res.energy.total:.8f} (flat-wall value {flat:.8f}), "
          f"converged={res.converged} after {res.iterations} iterations")
    print(f"   seed energies {[round(e, 6) for e in res.seed_energies]}, winner {res.seed_index}")
    print(f"   Young residuals {[f'{r:.2e}' for r in res.young_residuals]}, multiplier {res.multiplier:.4f}")
    atomic_write(OUT / f"disk_m{m:g}.svg", droplet_svg(res.droplet, disk))

# a wetting wall: the drop spreads and beats the detached round ball
wet = Container.disk(1.0, sigma=-0.5)
res = minimize(wet, MinimizeConfig(volume=1e-3, vertex_count=256))
print(f"sigma=-0.5: wetted energy {res.energy.total:.6f} vs interior ball {res.seed_energies[-1]:.6f}")
atomic_write(OUT / "disk_wetting.svg", droplet_svg(res.droplet, wet))
