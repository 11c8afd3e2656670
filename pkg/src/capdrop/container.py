"""Planar containers with C^{1,1} boundary, boundary charts and blow-ups.

A container boundary is a closed counterclockwise curve parametrized by arc
length ``s`` (periodic with period ``length``).  Interior normals point to the
left of the tangent.  The adhesion coefficient ``sigma`` is stored at
equally spaced stations and linearly interpolated in ``s``; its integral along
the wall is evaluated exactly for that interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import shapely
from scipy import integrate, interpolate
from scipy.spatial import cKDTree

from .geometry import PolyDroplet, diameter, edge_normals, polygon_area, signed_area

__all__ = [
    "CircleCurve",
    "StadiumCurve",
    "SplineCurve",
    "FlatCurve",
    "Container",
    "BoundaryChart",
    "chart_at",
    "blow_up",
    "unblow",
    "split_perimeter",
]


def _rot90(v):
    # left normal of a tangent: the inward normal for counterclockwise curves
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


class CircleCurve:
    """Circle of radius ``radius``; ``s = 0`` at ``center + (radius, 0)``."""

    closed = True

    def __init__(self, radius: float, center=(0.0, 0.0)):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.length = 2.0 * math.pi * self.radius

    def point(self, s):
        t = np.asarray(s, dtype=float) / self.radius
        return self.center + self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def tangent(self, s):
        t = np.asarray(s, dtype=float) / self.radius
        return np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def curvature(self, s):
        return np.full(np.shape(s), 1.0 / self.radius)

    def area(self):
        return math.pi * self.radius**2


class StadiumCurve:
    """Two parallel flat sides of length ``flat`` capped by half-circles of
    radius ``radius``.  ``s = 0`` is the midpoint of the bottom side, which
    lies on ``y = -radius``.  Curvature is bounded and piecewise constant."""

    closed = True

    def __init__(self, flat: float, radius: float):
        if flat <= 0 or radius <= 0:
            raise ValueError("stadium needs positive flat length and radius")
        self.flat = float(flat)
        self.radius = float(radius)
        half = math.pi * self.radius
        # breakpoints: bottom-right half, right cap, top, left cap, bottom-left half
        self._b = np.cumsum([0.0, self.flat / 2, half, self.flat, half, self.flat / 2])
        self.length = float(self._b[-1])

    def _pieces(self, s):
        s = np.mod(np.asarray(s, dtype=float), self.length)
        idx = np.clip(np.searchsorted(self._b, s, side="right") - 1, 0, 4)
        return s, idx, s - self._b[idx]

    def _eval(self, s):
        s, idx, loc = self._pieces(s)
        r, f = self.radius, self.flat
        pt = np.zeros(s.shape + (2,))
        tg = np.zeros(s.shape + (2,))
        k = np.zeros(s.shape)
        for piece, start, direction in ((0, (0.0, -r), (1.0, 0.0)), (2, (f / 2, r), (-1.0, 0.0)), (4, (-f / 2, -r), (1.0, 0.0))):
            m = idx == piece
            pt[m] = np.asarray(start) + loc[m, None] * np.asarray(direction)
            tg[m] = direction
        for piece, cx, a0 in ((1, f / 2, -math.pi / 2), (3, -f / 2, math.pi / 2)):
            m = idx == piece
            ang = a0 + loc[m] / r
            pt[m] = np.column_stack([cx + r * np.cos(ang), r * np.sin(ang)])
            tg[m] = np.column_stack([-np.sin(ang), np.cos(ang)])
            k[m] = 1.0 / r
        return pt, tg, k

    def point(self, s):
        return self._eval(s)[0]

    def tangent(self, s):
        return self._eval(s)[1]

    def curvature(self, s):
        return self._eval(s)[2]

    def area(self):
        return 2.0 * self.radius * self.flat + math.pi * self.radius**2


class SplineCurve:
    """Periodic cubic spline through counterclockwise samples, reparametrized
    by arc length."""

    closed = True

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 8:
            raise ValueError("need at least 8 boundary samples")
        if signed_area(pts) < 0:
            pts = pts[::-1]
        closed = np.vstack([pts, pts[:1]])
        chord = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(closed, axis=0), axis=1))])
        first = interpolate.CubicSpline(chord, closed, bc_type="periodic")
        speed = lambda t: np.linalg.norm(first(t, 1), axis=-1)
        arc = np.concatenate(
            [[0.0], np.cumsum([integrate.quad(speed, a, b, epsabs=1e-13)[0] for a, b in zip(chord[:-1], chord[1:])])]
        )
        self.length = float(arc[-1])
        n = max(4 * len(pts), 1024)
        s_grid = np.linspace(0.0, self.length, n + 1)
        t_grid = interpolate.CubicSpline(arc, chord)(s_grid)
        samples = first(t_grid)
        samples[-1] = samples[0]
        self._spline = interpolate.CubicSpline(s_grid, samples, bc_type="periodic")

    def point(self, s):
        return self._spline(np.mod(s, self.length))

    def tangent(self, s):
        d = self._spline(np.mod(s, self.length), 1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def curvature(self, s):
        s = np.mod(s, self.length)
        d1, d2 = self._spline(s, 1), self._spline(s, 2)
        cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        return cross / np.linalg.norm(d1, axis=-1) ** 3

    def area(self):
        # Green's formula with the periodic trapezoid rule on the spline
        s = np.linspace(0.0, self.length, 8193)[:-1]
        p, d = self._spline(s), self._spline(s, 1)
        return 0.5 * float(np.mean(p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0])) * self.length


class FlatCurve:
    """The straight wall ``{x_2 = 0}`` traversed left to right, i.e. the
    boundary of the upper half-plane.  Not closed; used for synthetic flat
    containers and for half-space blow-ups."""

    closed = False
    length = math.inf

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return np.stack([s, np.zeros_like(s)], axis=-1)

    def tangent(self, s):
        s = np.asarray(s, dtype=float)
        return np.stack([np.ones_like(s), np.zeros_like(s)], axis=-1)

    def curvature(self, s):
        return np.zeros(np.shape(s))

    def area(self):
        return math.inf


def _sigma_from_callable(fn: Callable[[np.ndarray], np.ndarray], s: np.ndarray) -> np.ndarray:
    return np.asarray(fn(s), dtype=float) * np.ones_like(s)


class Container:
    """Container ``A`` with adhesion field ``sigma`` and bulk potential ``g``.

    Parameters
    ----------
    curve
        Boundary curve object (``CircleCurve``, ``StadiumCurve``,
        ``SplineCurve`` or ``FlatCurve``).
    sigma
        Constant, callable of arc length, or array of station values.
    g
        Callable ``g(points) -> values`` on ``(..., 2)`` arrays, or None for
        zero potential.
    n_stations
        Number of equally spaced boundary stations (>= 256).  For the flat
        wall, stations cover ``flat_extent``.
    """

    def __init__(self, curve, sigma=0.0, g=None, n_stations: int = 2048, flat_extent: float = 10.0):
        if n_stations < 256:
            raise ValueError("need at least 256 boundary stations")
        self.curve = curve
        self.closed = curve.closed
        if self.closed:
            self.length = curve.length
            self.s_stations = curve.length * np.arange(n_stations) / n_stations
            self.spacing = curve.length / n_stations
        else:
            self.length = math.inf
            self.s_stations = np.linspace(-flat_extent, flat_extent, n_stations)
            self.spacing = self.s_stations[1] - self.s_stations[0]
        self.points = curve.point(self.s_stations)
        self.tangents = curve.tangent(self.s_stations)
        self.normals = -_rot90(self.tangents)
        self.station_curvature = np.asarray(curve.curvature(self.s_stations), dtype=float)
        if callable(sigma):
            vals = _sigma_from_callable(sigma, self.s_stations)
        else:
            vals = np.asarray(sigma, dtype=float) * np.ones(n_stations)
        if vals.shape != (n_stations,):
            raise ValueError(f"sigma table needs {n_stations} station values, got {vals.shape}")
        if np.any(vals <= -1.0) or np.any(vals >= 1.0) or not np.all(np.isfinite(vals)):
            raise ValueError("sigma must lie in the open interval (-1, 1) at every station")
        self.sigma_values = vals
        self.g = g
        self.snap_tol = 1e-9 * self.diameter_estimate()
        ext = np.append(vals, vals[0]) if self.closed else vals
        self.sigma_lipschitz = float(np.max(np.abs(np.diff(ext))) / self.spacing)
        self.curvature_bound = float(np.max(np.abs(self.station_curvature)))
        seg = np.diff(ext) if self.closed else np.diff(vals)
        self._cum = np.concatenate([[0.0], np.cumsum(self.spacing * (ext[:-1] + 0.5 * seg))])
        self._tree = cKDTree(self.points)
        self._poly = None
        self.reach = self._reach()

    # -- construction helpers -------------------------------------------------
    @classmethod
    def disk(cls, radius: float = 1.0, **kw) -> "Container":
        return cls(CircleCurve(radius), **kw)

    @classmethod
    def ellipse(cls, a: float, b: float, samples: int = 4096, **kw) -> "Container":
        t = 2 * math.pi * np.arange(samples) / samples
        return cls(SplineCurve(np.column_stack([a * np.cos(t), b * np.sin(t)])), **kw)

    @classmethod
    def stadium(cls, flat: float, radius: float, **kw) -> "Container":
        return cls(StadiumCurve(flat, radius), **kw)

    @classmethod
    def from_samples(cls, points, **kw) -> "Container":
        return cls(SplineCurve(points), **kw)

    @classmethod
    def half_plane(cls, sigma=0.0, **kw) -> "Container":
        return cls(FlatCurve(), sigma=sigma, **kw)

    # -- basic geometry ------------------------------------------------------
    def diameter_estimate(self) -> float:
        if not self.closed:
            return float(np.ptp(self.s_stations))
        return diameter(self.points)

    @property
    def area(self) -> float:
        return float(self.curve.area())

    def point(self, s):
        return self.curve.point(s)

    def tangent(self, s):
        return self.curve.tangent(s)

    def inward_normal(self, s):
        return _rot90(self.curve.tangent(s))

    def outward_normal(self, s):
        return -_rot90(self.curve.tangent(s))

    def curvature(self, s):
        return self.curve.curvature(s)

    def _reach(self) -> float:
        kappa = max(self.curvature_bound, 1e-12)
        r = 0.5 / kappa
        if self.closed:
            # chords between stations far apart along the wall bound the
            # normal-coordinate injectivity radius
            gap = math.pi / (2.0 * kappa)
            sep = int(math.ceil(gap / self.spacing))
            n = len(self.s_stations)
            if 2 * sep < n:
                pairs = self._tree.query_pairs(2.0 * r, output_type="ndarray")
                if len(pairs):
                    di = np.abs(pairs[:, 0] - pairs[:, 1])
                    di = np.minimum(di, n - di)
                    far = pairs[di > sep]
                    if len(far):
                        d = np.linalg.norm(self.points[far[:, 0]] - self.points[far[:, 1]], axis=1)
                        r = min(r, 0.5 * float(d.min()))
        return r

    # -- sigma --------------------------------------------------------------
    def _locate(self, s):
        s = np.asarray(s, dtype=float)
        if self.closed:
            q, rem = np.divmod(s, self.length)
            idx = np.minimum((rem // self.spacing).astype(int), len(self.s_stations) - 1)
            return q, idx, rem - self.s_stations[idx]
        idx = np.clip(((s - self.s_stations[0]) // self.spacing).astype(int), 0, len(self.s_stations) - 2)
        return np.zeros_like(s), idx, s - self.s_stations[idx]

    def _station(self, idx):
        return self.sigma_values[np.mod(idx, len(self.sigma_values))] if self.closed else self.sigma_values[idx]

    def sigma(self, s):
        _, idx, loc = self._locate(s)
        lo, hi = self._station(idx), self._station(idx + 1)
        return lo + (hi - lo) * loc / self.spacing

    def sigma_slope(self, s):
        _, idx, _ = self._locate(s)
        return (self._station(idx + 1) - self._station(idx)) / self.spacing

    def sigma_primitive(self, s):
        """An antiderivative of the interpolated sigma in ``s`` (unwrapped)."""
        q, idx, loc = self._locate(s)
        lo, hi = self._station(idx), self._station(idx + 1)
        part = loc * lo + 0.5 * (hi - lo) * loc**2 / self.spacing
        return q * self._cum[-1] + self._cum[idx] + part

    def sigma_integral(self, s_a, s_b):
        """Integral of sigma along the wall from ``s_a`` to ``s_b`` (``s_b >= s_a``)."""
        return self.sigma_primitive(s_b) - self.sigma_primitive(s_a)

    @property
    def sigma_min(self) -> float:
        return float(self.sigma_values.min())

    # -- g --------------------------------------------------------------------
    def g_values(self, pts):
        pts = np.asarray(pts, dtype=float)
        if self.g is None:
            return np.zeros(pts.shape[:-1])
        return np.asarray(self.g(pts), dtype=float) * np.ones(pts.shape[:-1])

    # -- projection onto the wall ----------------------------------------------
    def project(self, points, s_guess=None, iters: int = 8):
        """Closest-point coordinates ``(s, d)`` with ``d`` the inward normal offset.

        ``s`` is unwrapped to the representative nearest ``s_guess`` when given.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.closed:
            _, j = self._tree.query(pts)
            s = self.s_stations[j].astype(float)
            if s_guess is not None:
                s = s + self.length * np.round((np.asarray(s_guess) - s) / self.length)
        else:
            s = pts[:, 0].copy()
        for _ in range(iters):
            c = self.point(s)
            t = self.tangent(s)
            k = self.curvature(s)
            r = pts - c
            f = (r * t).sum(-1)
            df = -1.0 + k * (r * _rot90(t)).sum(-1)
            s = s - f / np.where(np.abs(df) > 1e-12, df, -1.0)
        d = ((pts - self.point(s)) * self.inward_normal(s)).sum(-1)
        return s, d

    def contains(self, points, tol: float | None = None, s_guess=None) -> np.ndarray:
        tol = self.snap_tol if tol is None else tol
        pts = np.atleast_2d(points)
        if not self.closed:
            return pts[:, 1] >= -tol
        _, d = self.project(pts, s_guess)
        if self._poly is None:
            self._poly = shapely.Polygon(self.points)
            shapely.prepare(self._poly)
        inside = shapely.contains_xy(self._poly, pts[:, 0], pts[:, 1])
        near = np.abs(d) < 0.5 * self.reach
        return np.where(near, d >= -tol, inside)

    def interior_point(self) -> np.ndarray:
        """A point deep inside the container (station centroid, or the
        deepest station-normal sample if the centroid falls outside)."""
        c = self.points.mean(axis=0)
        if self.contains(c[None])[0]:
            return c
        cand = self.points + self.reach * _rot90(self.tangents)
        return cand[np.argmax(self.contains(cand))]


@dataclass(frozen=True)
class BoundaryChart:
    """Normal-coordinate chart ``phi(x1, x2) = c(s0 + x1) + x2 n_in(s0 + x1)``.

    Maps ``{x2 = 0}`` onto the wall exactly and ``{x2 > 0}`` (locally) into
    the container; ``rotation`` is the derivative at 0 transposed, taking the
    outward wall normal to ``-e2``.
    """

    container: Container
    s0: float
    base: np.ndarray
    rotation: np.ndarray
    reach: float

    def to_container(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        s = self.s0 + xi[:, 0]
        return self.container.point(s) + xi[:, 1:2] * self.container.inward_normal(s)

    def from_container(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        s, d = self.container.project(x, s_guess=np.full(len(x), self.s0))
        return np.column_stack([s - self.s0, d])


def chart_at(c: Container, s0: float) -> BoundaryChart:
    """Boundary chart based at the wall point with arc-length coordinate ``s0``."""
    reach = c.reach
    if reach < 10.0 * c.snap_tol:
        raise ValueError(f"chart reach {reach:.3g} is below 10x the snap tolerance")
    t = c.tangent(s0)
    rot = np.vstack([t, _rot90(t)])
    return BoundaryChart(c, float(s0), c.point(s0), rot, reach)


def _chart_extent(p: PolyDroplet, chart: BoundaryChart):
    if np.max(np.linalg.norm(p.vertices - chart.base, axis=1)) > chart.reach:
        raise ValueError("droplet exceeds the chart reach")


def blow_up(p: PolyDroplet, chart: BoundaryChart, scale: float) -> PolyDroplet:
    """Pull the droplet back through the chart and divide by ``scale``.

    The result lives in the closed upper half-plane; contact vertices land
    exactly on ``{x2 = 0}`` and their params become the ``x1`` coordinates.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    _chart_extent(p, chart)
    xi = chart.from_container(p.vertices)
    c = p.contact
    if c.any():
        s = p.params[c]
        L = chart.container.length
        if math.isfinite(L):
            s = s + L * np.round((chart.s0 - s) / L)
        xi[c, 0] = s - chart.s0
        xi[c, 1] = 0.0
    xi /= scale
    params = np.where(c, xi[:, 0], np.nan)
    return PolyDroplet(xi, c, params, validate=False)


def unblow(q: PolyDroplet, chart: BoundaryChart, scale: float) -> PolyDroplet:
    """Inverse of ``blow_up``: push a half-plane polygon into the container."""
    xi = q.vertices * scale
    c = q.contact
    xi[c, 1] = 0.0
    verts = chart.to_container(xi)
    params = np.where(c, chart.s0 + xi[:, 0], np.nan)
    return PolyDroplet(verts, c, params, validate=False)


def check_in_container(p: PolyDroplet, c: Container):
    """Raise if a contact vertex is off the wall or a free vertex is outside."""
    tol = c.snap_tol
    if p.contact.any():
        on = c.point(p.params[p.contact])
        if np.max(np.linalg.norm(on - p.vertices[p.contact], axis=1)) > tol:
            raise ValueError("contact vertex off the container boundary beyond snap tolerance")
    free = ~p.contact
    guess = None
    if p.contact.any():
        guess = np.full(int(free.sum()), np.nanmean(p.params[p.contact]))
    if not np.all(c.contains(p.vertices[free], s_guess=guess)):
        raise ValueError("droplet vertex outside the container")


def _wetted_arcs(p: PolyDroplet, c: Container):
    """Arc-length intervals ``(s_a, s_b)`` of the wetted edges."""
    run = p.contact_run
    if len(run) < 2:
        return np.zeros(0), np.zeros(0)
    s = p.params[run].astype(float)
    if c.closed:
        # unwrap so consecutive contact parameters increase by less than a period
        steps = np.mod(np.diff(s), c.length)
        s = s[0] + np.concatenate([[0.0], np.cumsum(steps)])
    if np.any(np.diff(s) <= 0):
        raise ValueError("wetted run must advance along the boundary orientation")
    return s[:-1], s[1:]


def split_perimeter(p: PolyDroplet, c: Container) -> tuple[float, float]:
    """``(free_length, wetted_length)``; wetted length is measured along the wall."""
    check_in_container(p, c)
    _, lengths = edge_normals(p.vertices)
    free = float(lengths[p.free_edges].sum())
    a, b = _wetted_arcs(p, c)
    return free, float(np.sum(b - a))
