"""Independent closed-form oracles used by the tests."""

import math

from scipy.optimize import brentq


def lens_in_disk(R: float, sigma: float, m: float):
    """Exact constrained minimum for a droplet of area ``m`` wetting the wall
    of a disk of radius ``R`` with constant adhesion ``sigma``.

    The minimizer is the lens bounded by the wall and a circle of radius
    ``rho`` meeting it at the Young angle.  Returns ``(energy, rho, d)`` with
    ``d`` the distance between the two centers.
    """

    def parts(rho):
        d = math.sqrt(R * R + rho * rho - 2 * R * rho * sigma)
        a_r = math.acos((d * d + R * R - rho * rho) / (2 * d * R))
        a_c = math.acos((d * d + rho * rho - R * R) / (2 * d * rho))
        area = R * R * a_r + rho * rho * a_c - R * d * math.sin(a_r)
        return area, 2 * rho * a_c + sigma * 2 * R * a_r, d

    lo, hi = 1e-9 * R, R
    rho = brentq(lambda r: parts(r)[0] - m, lo, hi, xtol=1e-15, rtol=1e-15)
    area, energy, d = parts(rho)
    return energy, rho, d
