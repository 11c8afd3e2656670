"""Exact reference quantities for sessile droplets in a half-space.

The droplet problem in ``H = {x_n > 0}`` with constant adhesion ``tau`` has
the truncated ball as its (unique up to horizontal translation) volume-one
minimizer.  Everything here is a pure function of ``(n, tau)``; the
``rho``-integrals are evaluated with adaptive Gauss-Kronrod quadrature after
the substitution ``rho = sin(theta)``, and the planar and spatial cases also
have closed forms that are checked against the quadrature path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .geometry import PolyDroplet, edge_normals, is_simple

__all__ = [
    "CapGeometry",
    "CapScalars",
    "IdealDroplet",
    "ball_volume",
    "cap_volume",
    "cap_lateral_area",
    "cap_base_area",
    "phi_aux",
    "psi",
    "psi_prime",
    "cap_scalars",
    "ideal_droplet_boundary",
    "ideal_cap_arc",
    "support_function",
    "anisotropic_energy",
]

_QUAD_ABS_TOL = 1e-12
_QUAD_REL_TOL = 1e-13


@dataclass(frozen=True)
class CapGeometry:
    """Dimension ``n`` and contact parameter ``tau`` of a spherical cap."""

    n: int
    tau: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if not (-1.0 < self.tau < 1.0):
            raise ValueError(f"tau must lie in the open interval (-1, 1), got {self.tau!r}")


@dataclass(frozen=True)
class CapScalars:
    volume: float
    lateral_area: float
    base_area: float
    psi: float
    psi_prime: float
    phi: float


@dataclass(frozen=True)
class IdealDroplet:
    """``z + r K(tau)``: the optimal droplet of volume ``r**n`` based at ``z``.

    ``z`` is a point of the wall ``{x_n = 0}``; for the planar case it is the
    horizontal coordinate.
    """

    geometry: CapGeometry
    r: float = 1.0
    z: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"scale r must be positive, got {self.r!r}")


def ball_volume(k: int) -> float:
    """Volume of the unit ball in R^k."""
    return math.pi ** (k / 2.0) / special.gamma(k / 2.0 + 1.0)


def _check(geom: CapGeometry) -> CapGeometry:
    if not isinstance(geom, CapGeometry):
        geom = CapGeometry(*geom)
    return geom


def _cos_power_integral(p: int, tau: float) -> float:
    # int_{-tau}^{1} (1 - rho^2)^{(p-1)/2} d rho == int_{-asin tau}^{pi/2} cos^p(theta) d theta
    lo = -math.asin(tau)
    val, _ = integrate.quad(
        lambda t: math.cos(t) ** p, lo, math.pi / 2, epsabs=_QUAD_ABS_TOL, epsrel=_QUAD_REL_TOL, limit=200
    )
    return val


def _closed_form(n: int, tau: float) -> tuple[float, float] | None:
    if n == 2:
        root = math.sqrt(1.0 - tau * tau)
        return math.pi / 2 + math.asin(tau) + tau * root, math.pi + 2.0 * math.asin(tau)
    if n == 3:
        return math.pi * (2.0 / 3.0 + tau - tau**3 / 3.0), 2.0 * math.pi * (1.0 + tau)
    return None


def cap_volume(geom: CapGeometry, method: str = "quad") -> float:
    """Volume ``V(tau)`` of ``S(tau) = {x in B : x_n > -tau}``.

    ``method`` is ``"quad"`` (any n) or ``"closed"`` (n = 2, 3 only).
    """
    geom = _check(geom)
    if method == "closed":
        cf = _closed_form(geom.n, geom.tau)
        if cf is None:
            raise ValueError(f"no closed form for n={geom.n}")
        return cf[0]
    return ball_volume(geom.n - 1) * _cos_power_integral(geom.n, geom.tau)


def cap_lateral_area(geom: CapGeometry, method: str = "quad") -> float:
    """Area ``A(tau)`` of the spherical part of ``S(tau)``."""
    geom = _check(geom)
    if method == "closed":
        cf = _closed_form(geom.n, geom.tau)
        if cf is None:
            raise ValueError(f"no closed form for n={geom.n}")
        return cf[1]
    n = geom.n
    return (n - 1) * ball_volume(n - 1) * _cos_power_integral(n - 2, geom.tau)


def cap_base_area(geom: CapGeometry) -> float:
    """Area ``A_0(tau)`` of the flat base of ``S(tau)``."""
    geom = _check(geom)
    return ball_volume(geom.n - 1) * (1.0 - geom.tau**2) ** ((geom.n - 1) / 2.0)


def phi_aux(geom: CapGeometry) -> float:
    """Auxiliary positive factor in the derivative of ``psi``.

    ``n (omega_n / 2 + sign(tau) |{x in B : 0 < x_n < |tau|}|)``, with the
    slab volume obtained as ``V(0) - V(-|tau|)``.
    """
    geom = _check(geom)
    half = cap_volume(CapGeometry(geom.n, 0.0))
    if geom.tau == 0.0:
        return geom.n * half
    slab = half - cap_volume(CapGeometry(geom.n, -abs(geom.tau)))
    return geom.n * (half + math.copysign(slab, geom.tau))


def psi(geom: CapGeometry) -> float:
    """Optimal half-space energy at unit volume, ``(A + tau A_0) / V^{(n-1)/n}``."""
    geom = _check(geom)
    n, tau = geom.n, geom.tau
    v = cap_volume(geom)
    return (cap_lateral_area(geom) + tau * cap_base_area(geom)) / v ** ((n - 1) / n)


def psi_prime(geom: CapGeometry) -> float:
    geom = _check(geom)
    n = geom.n
    v = cap_volume(geom)
    return cap_base_area(geom) * phi_aux(geom) / (n * v ** (2.0 - 1.0 / n))


def cap_scalars(geom: CapGeometry) -> CapScalars:
    geom = _check(geom)
    n, tau = geom.n, geom.tau
    v = cap_volume(geom)
    a = cap_lateral_area(geom)
    a0 = cap_base_area(geom)
    ph = phi_aux(geom)
    return CapScalars(
        volume=v,
        lateral_area=a,
        base_area=a0,
        psi=(a + tau * a0) / v ** ((n - 1) / n),
        psi_prime=a0 * ph / (n * v ** (2.0 - 1.0 / n)),
        phi=ph,
    )


def _planar(geom: CapGeometry):
    if geom.n != 2:
        raise NotImplementedError(f"polygonal droplets are only available for n=2, got n={geom.n}")


def _cap_frame(d: IdealDroplet):
    """Center, radius and half-base of the circle bounding z + r K(tau)."""
    tau = d.geometry.tau
    scale = d.r / math.sqrt(cap_volume(d.geometry))
    center = np.array([d.z, tau * scale])
    return center, scale, math.sqrt(1.0 - tau * tau) * scale


def ideal_droplet_boundary(d: IdealDroplet, segments: int, flat_segments: int | None = None) -> PolyDroplet:
    """Closed polygon approximating the boundary of ``z + r K(tau)`` (n = 2).

    Vertices run counterclockwise starting at the left end of the wetted
    base; base vertices lie exactly on ``x_2 = 0`` and carry contact flags,
    arc vertices lie exactly on the bounding circle.  ``flat_segments``
    defaults to a split proportional to base and arc length.
    """
    _planar(d.geometry)
    if segments < 4:
        raise ValueError(f"need at least 4 segments, got {segments}")
    tau = d.geometry.tau
    center, rad, half = _cap_frame(d)
    theta0 = -math.asin(tau)
    sweep = math.pi - 2.0 * theta0
    if flat_segments is None:
        flat_segments = int(round(segments * 2.0 * half / (2.0 * half + rad * sweep)))
    flat_segments = min(max(flat_segments, 1), segments - 3)
    arc_segments = segments - flat_segments

    xs = d.z + np.linspace(-half, half, flat_segments + 1)
    base = np.column_stack([xs, np.zeros_like(xs)])
    ang = theta0 + sweep * np.arange(1, arc_segments) / arc_segments
    arc = center + rad * np.column_stack([np.cos(ang), np.sin(ang)])
    verts = np.vstack([base, arc])
    contact = np.zeros(len(verts), dtype=bool)
    contact[: flat_segments + 1] = True
    params = np.full(len(verts), np.nan)
    params[: flat_segments + 1] = xs
    return PolyDroplet(verts, contact, params)


def ideal_cap_arc(d: IdealDroplet, samples: int = 4097) -> np.ndarray:
    """Dense polyline of the free arc ``closure(H ∩ ∂(z + r K))``, right to left."""
    _planar(d.geometry)
    center, rad, _ = _cap_frame(d)
    theta0 = -math.asin(d.geometry.tau)
    ang = np.linspace(theta0, math.pi - theta0, samples)
    arc = center + rad * np.column_stack([np.cos(ang), np.sin(ang)])
    arc[0, 1] = arc[-1, 1] = 0.0
    return arc


def support_function(geom: CapGeometry, nu) -> float | np.ndarray:
    """Support function of ``S(tau)``: ``sup {x . nu : x in S(tau)}``.

    ``nu`` is a unit vector or an array of unit vectors (last axis = n).
    """
    geom = _check(geom)
    nu = np.asarray(nu, dtype=float)
    if nu.shape[-1] != geom.n:
        raise ValueError(f"nu must have {geom.n} components, got shape {nu.shape}")
    norms = np.linalg.norm(nu, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ValueError("nu must be a unit vector (|nu| = 1 within 1e-12)")
    tau = geom.tau
    vert = nu[..., -1]
    horiz = np.linalg.norm(nu[..., :-1], axis=-1)
    rim = math.sqrt(1.0 - tau * tau) * horiz - tau * vert
    out = np.where(vert > -tau, 1.0, rim)
    return float(out) if out.ndim == 0 else out


def anisotropic_energy(geom: CapGeometry, poly: PolyDroplet) -> float:
    """Anisotropic perimeter of a planar polygon with integrand ``support_function``."""
    geom = _check(geom)
    _planar(geom)
    if not is_simple(poly.vertices):
        raise ValueError("polygon is self-intersecting")
    normals, lengths = edge_normals(poly.vertices)
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    return math.fsum(support_function(geom, normals) * lengths)
