"""Deficit against asymmetry in the half-plane.

Stretching the ideal cap horizontally (keeping area one) raises its energy
above psi(tau).  The ratio deficit / asymmetry^2 stays bounded away from zero,
which is the quantitative stability of the cap.  The probe reports the same
ratio with the absolute energy excess, psi(tau) times the deficit.
"""

import numpy as np

from capdrop.energy import asymmetry, deficit
from capdrop.harness import stability_probe, stretch_family
from capdrop.sessile import CapGeometry, psi

tau = 0.0
rng = np.random.default_rng(0)
p0 = psi(CapGeometry(2, tau))
print(f"{'deficit':>10} {'asymmetry':>10} {'ratio':>8} {'psi*ratio':>10}")
for f in sorted(stretch_family(tau, 6, rng), key=lambda f: deficit(f, tau)):
    d, a = deficit(f, tau), asymmetry(f, tau).asymmetry
    print(f"{d:10.2e} {a:10.2e} {d / a**2:8.4f} {p0 * d / a**2:10.4f}")

for form in ("capillary", "wulff"):
    vals = [stability_probe(tau, "stretch", samples=16, rng_seed=s, form=form) for s in range(3)]
    print(f"{form}: min ratio over 16 stretches, seeds 0-2: {', '.join(f'{v:.4f}' for v in vals)}")
print("bump family:", f"{stability_probe(0.3, 'bump', samples=8):.4f}")
