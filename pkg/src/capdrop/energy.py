"""Gauss free energy of polygonal droplets and the half-plane stability
functionals (deficit and asymmetry)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .container import Container, _wetted_arcs, check_in_container
from .geometry import PolyDroplet, edge_normals, polygon_area, symmetric_difference_area
from .sessile import CapGeometry, IdealDroplet, ideal_droplet_boundary, psi

__all__ = [
    "EnergyBreakdown",
    "StabilityReport",
    "bulk_integral",
    "gauss_energy",
    "half_space_energy",
    "deficit",
    "asymmetry",
    "reference_cap",
]

REFERENCE_SEGMENTS = 4096


@dataclass(frozen=True)
class EnergyBreakdown:
    free_surface: float
    wetted: float
    bulk: float
    total: float
    lagrange_multiplier: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StabilityReport:
    deficit: float
    asymmetry: float
    optimal_shift: float


def bulk_integral(vertices: np.ndarray, g) -> float:
    """Integral of ``g`` over a polygon: fan triangulation from vertex 0 with
    the edge-midpoint rule on each (signed) triangle, exact for affine ``g``."""
    if g is None:
        return 0.0
    p0 = vertices[0]
    a, b = vertices[1:-1], vertices[2:]
    da, db = a - p0, b - p0
    tri = 0.5 * (da[:, 0] * db[:, 1] - da[:, 1] * db[:, 0])
    mids = np.concatenate([0.5 * (p0 + a), 0.5 * (a + b), 0.5 * (b + p0)])
    vals = np.asarray(g(mids), dtype=float) * np.ones(len(mids))
    vals = vals.reshape(3, -1).mean(axis=0)
    return float(np.dot(tri, vals))


def _multiplier_estimate(p: PolyDroplet, c: Container | None) -> float:
    free = p.free_edges
    if len(free) < 2:
        return float("nan")
    v = p.vertices
    d = np.roll(v, -1, axis=0) - v
    ang = np.arctan2(d[:, 1], d[:, 0])
    turn = np.mod(ang - np.roll(ang, 1) + math.pi, 2 * math.pi) - math.pi
    lengths = np.hypot(d[:, 0], d[:, 1])
    # interior vertices of the free boundary: both adjacent edges free
    is_free = np.zeros(len(v), dtype=bool)
    is_free[free] = True
    inner = np.flatnonzero(is_free & np.roll(is_free, 1))
    if len(inner) == 0:
        return float("nan")
    curv = turn[inner] / (0.5 * (lengths[inner] + np.roll(lengths, 1)[inner]))
    gv = c.g_values(v[inner]) if c is not None else 0.0
    return float(np.mean(curv + gv))


def gauss_energy(p: PolyDroplet, c: Container) -> EnergyBreakdown:
    """Free interface length + wall integral of sigma + bulk integral of g."""
    check_in_container(p, c)
    _, lengths = edge_normals(p.vertices)
    free = float(lengths[p.free_edges].sum())
    a, b = _wetted_arcs(p, c)
    wetted = float(np.sum(c.sigma_integral(a, b))) if len(a) else 0.0
    bulk = bulk_integral(p.vertices, c.g)
    return EnergyBreakdown(free, wetted, bulk, free + wetted + bulk, _multiplier_estimate(p, c))


def _check_half_plane(p: PolyDroplet, tol: float = 1e-9):
    scale = max(1.0, float(np.ptp(p.vertices)))
    if np.min(p.vertices[:, 1]) < -tol * scale:
        raise ValueError("polygon leaves the closed upper half-plane")
    if np.any(np.abs(p.vertices[p.contact, 1]) > tol * scale):
        raise ValueError("contact vertices must lie on the wall x2 = 0")


def half_space_energy(p: PolyDroplet, tau: float) -> float:
    """Capillarity energy in the upper half-plane: free length plus ``tau``
    times wetted length."""
    _check_half_plane(p)
    _, lengths = edge_normals(p.vertices)
    weights = np.ones_like(lengths)
    weights[p.wetted_edges] = tau
    # correctly rounded, so it matches anisotropic_energy bit for bit when
    # the support function equals these weights edge by edge
    return math.fsum(weights * lengths)


def deficit(p: PolyDroplet, tau: float) -> float:
    area = polygon_area(p)
    if area <= 0:
        raise ValueError("zero-area polygon")
    return half_space_energy(p, tau) / (psi(CapGeometry(2, tau)) * math.sqrt(area)) - 1.0


@lru_cache(maxsize=64)
def reference_cap(tau: float, segments: int = REFERENCE_SEGMENTS) -> np.ndarray:
    """Vertices of the unit-area polygonal ideal droplet used as reference."""
    poly = ideal_droplet_boundary(IdealDroplet(CapGeometry(2, float(tau))), segments)
    v = poly.vertices.copy()
    v.setflags(write=False)
    return v


def _golden(f, lo: float, hi: float, tol: float):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _min_shift(f, lo: float, hi: float, grid: int = 101, tol: float = 1e-6):
    """Golden-section minimum of ``f`` on ``[lo, hi]`` cross-checked by a grid."""
    z_g, f_g = _golden(f, lo, hi, tol)
    zs = np.linspace(lo, hi, grid)
    fs = np.array([f(z) for z in zs])
    j = int(np.argmin(fs))
    if f_g > fs[j] + 1e-3:
        step = zs[1] - zs[0]
        z_g, f_g = _golden(f, max(lo, zs[j] - step), min(hi, zs[j] + step), tol)
        if f_g > fs[j]:
            z_g, f_g = float(zs[j]), float(fs[j])
    return z_g, f_g


def asymmetry(p: PolyDroplet, tau: float, backend: str = "clip") -> StabilityReport:
    """Normalized symmetric-difference distance to the closest horizontal
    translate of the equal-area ideal droplet."""
    area = polygon_area(p)
    if area <= 0:
        raise ValueError("zero-area polygon")
    _check_half_plane(p)
    ref = reference_cap(float(tau)) * math.sqrt(area)
    v = p.vertices

    def mismatch(z):
        return symmetric_difference_area(v, ref + np.array([z, 0.0]), backend=backend) / area

    half = 0.5 * float(np.ptp(ref[:, 0]))
    lo, hi = float(v[:, 0].min()) - half, float(v[:, 0].max()) + half
    z, val = _min_shift(mismatch, lo, hi)
    return StabilityReport(deficit(p, tau), float(val), float(z))
