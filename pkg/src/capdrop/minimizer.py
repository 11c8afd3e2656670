"""Volume-constrained minimization of the Gauss free energy over polygonal
droplets whose contact vertices slide along the container wall.

The free boundary is parametrized by scalar offsets ``u_i`` of its interior
vertices along fixed directions (vertex normals at the last remesh) and, for
wetted droplets, by the arc-length coordinates ``s_L < s_R`` of the two
contact points.  The wetted vertices are spread uniformly in arc length
between them.  Each iteration takes a Newton step on the KKT system of the
area-constrained problem (falling back to the projected gradient when the
reduced Hessian is not positive definite), restores the area exactly by a
uniform offset of the free vertices, and backtracks until the Armijo
condition holds.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import shapely
from scipy import linalg, optimize, sparse
from scipy.spatial import cKDTree

from .container import Container, chart_at, unblow
from .energy import EnergyBreakdown, gauss_energy
from .geometry import PolyDroplet, diameter, signed_area, symmetric_difference_area
from .sessile import CapGeometry, IdealDroplet, ideal_droplet_boundary

__all__ = [
    "MinimizeConfig",
    "MinimizeResult",
    "PinchOffError",
    "seed_droplet",
    "chart_image",
    "interior_seed",
    "minimize",
    "minimize_from",
    "contact_residuals",
    "young_residual",
    "almost_minimality_probe",
    "energy_floor",
]

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


def energy_floor(energy: float, vertices: np.ndarray) -> float:
    """Rounding level of an energy evaluation: relative error of the sum plus
    the edge-length noise from rounding each coordinate, which grows like the
    square root of the vertex count."""
    scale = float(np.max(np.abs(vertices))) if len(vertices) else 0.0
    return 64 * _EPS * abs(energy) + 4 * _EPS * math.sqrt(len(vertices)) * scale
_GAUSS2 = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))


class PinchOffError(RuntimeError):
    """The free boundary came within a tenth of an edge length of itself."""


@dataclass
class MinimizeConfig:
    volume: float
    vertex_count: int = 512
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    grad_tol: float = 1e-8
    max_iters: int = 200
    remesh_interval: int = 25
    seeds: Sequence[Any] | None = None
    n_boundary_seeds: int = 8
    interior_seed: bool = True
    rng_seed: int = 0
    jitter: float = 0.0
    max_backtracks: int = 40

    def __post_init__(self):
        if not self.volume > 0:
            raise ValueError("volume must be positive")
        if self.vertex_count < 32:
            raise ValueError("vertex_count must be at least 32")
        if not (0.0 < self.shrink < 1.0):
            raise ValueError("shrink must lie in (0, 1)")
        if self.max_iters < 1 or self.remesh_interval < 1:
            raise ValueError("max_iters and remesh_interval must be positive")


@dataclass
class MinimizeResult:
    droplet: PolyDroplet
    energy: EnergyBreakdown
    contact_point: np.ndarray | None
    contact_param: float | None
    young_residuals: list[float]
    converged: bool
    iterations: int
    multiplier: float = float("nan")
    seed_index: int = 0
    seed_energies: list[float] = field(default_factory=list)
    history: list[float] = field(default_factory=list)
    remeshes: list[int] = field(default_factory=list)
    grad_norm: float = float("nan")
    message: str = ""

    @property
    def area(self) -> float:
        return signed_area(self.droplet.vertices)


# ---------------------------------------------------------------------------
# seeds


def _vertex_normals(pts: np.ndarray, closed: bool) -> np.ndarray:
    """Outward unit normals at the interior vertices of a counterclockwise
    chain (all vertices when ``closed``)."""
    if closed:
        d = np.roll(pts, -1, axis=0) - pts
        en = np.column_stack([d[:, 1], -d[:, 0]])
        en /= np.linalg.norm(en, axis=1, keepdims=True)
        n = en + np.roll(en, 1, axis=0)
    else:
        d = np.diff(pts, axis=0)
        en = np.column_stack([d[:, 1], -d[:, 0]])
        en /= np.linalg.norm(en, axis=1, keepdims=True)
        n = en[:-1] + en[1:]
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def _fix_area(verts: np.ndarray, movable: np.ndarray, dirs: np.ndarray, m: float, tol: float = 1e-14) -> np.ndarray:
    """Uniform offset ``eta`` of the movable vertices along ``dirs`` solving
    ``area = m`` by Newton iteration (area is quadratic in ``eta``)."""
    v = verts.copy()
    for _ in range(50):
        a = signed_area(v)
        if abs(a - m) <= tol * m:
            break
        nxt, prv = np.roll(v, -1, axis=0), np.roll(v, 1, axis=0)
        grad = 0.5 * np.column_stack([nxt[:, 1] - prv[:, 1], prv[:, 0] - nxt[:, 0]])
        slope = float(np.sum(grad[movable] * dirs))
        v[movable] += (-(a - m) / slope) * dirs
    return v


def chart_image(q: PolyDroplet, chart, m: float) -> PolyDroplet:
    """Push a half-plane polygon through ``chart`` at the scale giving area ``m``.

    Chart distortion changes the area at relative order ``t * curvature``;
    the scale is found by root finding so that the image already has area
    ``m`` and the final uniform normal offset only absorbs rounding.
    """
    area0 = signed_area(q.vertices)
    extent = float(np.max(np.linalg.norm(q.vertices, axis=1)))
    t_max = 0.5 * chart.reach / extent
    if t_max * t_max * area0 <= m:
        raise ValueError(f"volume {m:g} too large for the chart reach {chart.reach:.3g} at s={chart.s0:g}")
    t0 = math.sqrt(m / area0)
    t = optimize.brentq(lambda t: signed_area(unblow(q, chart, t).vertices) - m, 1e-3 * t0, t_max, xtol=1e-15)
    poly = unblow(q, chart, t)
    free = ~poly.contact
    run = poly.contact_run
    chain = np.vstack([poly.vertices[run[-1]], poly.vertices[free], poly.vertices[run[0]]])
    dirs = _vertex_normals(chain, closed=False)
    verts = _fix_area(poly.vertices, free, dirs, m)
    return PolyDroplet(verts, poly.contact, poly.params)


def seed_droplet(c: Container, s: float, tau_guess: float | None, m: float, k: int) -> PolyDroplet:
    """Chart image of the scaled ideal droplet at the wall point ``s``.

    The polygon has ``k`` vertices and area ``m``; ``tau_guess`` defaults to
    the local adhesion coefficient.
    """
    tau = float(c.sigma(s)) if tau_guess is None else float(tau_guess)
    ideal = ideal_droplet_boundary(IdealDroplet(CapGeometry(2, tau)), k)
    return chart_image(ideal, chart_at(c, s), m)


def interior_seed(c: Container, m: float, k: int, center=None) -> PolyDroplet:
    """Regular ``k``-gon of area ``m`` around a deep interior point."""
    center = c.interior_point() if center is None else np.asarray(center, dtype=float)
    ang = 2 * math.pi * np.arange(k) / k
    r = math.sqrt(2.0 * m / (k * math.sin(2 * math.pi / k)))
    return PolyDroplet(center + r * np.column_stack([np.cos(ang), np.sin(ang)]))


# ---------------------------------------------------------------------------
# parametrized droplet


class _Chain:
    """Droplet state: offsets of free vertices plus contact parameters."""

    def __init__(self, c: Container, base, dirs, s_l=None, s_r=None, n_wet: int = 0):
        self.c = c
        self.base = np.asarray(base, dtype=float)
        self.dirs = np.asarray(dirs, dtype=float)
        self.nf = len(self.base)
        self.wetted = s_l is not None
        self.w = n_wet
        if self.wetted:
            self.theta = np.concatenate([np.zeros(self.nf), [s_l, s_r]])
            self.M = self.w + self.nf + 1
            self.beta = np.arange(self.w + 1) / self.w
            a = self.w + np.arange(self.nf + 1)
            self.free_a, self.free_b = a, np.append(a[1:], 0)
            self.qidx = self.w + 1 + np.arange(self.nf)
            self._anchor(s_l, s_r)
        else:
            self.theta = np.zeros(self.nf)
            self.M = self.nf
            self.free_a = np.arange(self.M)
            self.free_b = np.roll(self.free_a, -1)
            self.qidx = np.arange(self.nf)
        self.n = len(self.theta)

    @classmethod
    def from_droplet(cls, p: PolyDroplet, c: Container) -> "_Chain":
        run = p.contact_run
        if len(run) == 0:
            v = p.vertices
            return cls(c, v, _vertex_normals(v, closed=True))
        if len(run) < 2:
            raise ValueError("a wetted droplet needs at least two contact vertices")
        s = p.params[run]
        steps = np.mod(np.diff(s), c.length) if c.closed else np.diff(s)
        s_l, s_r = float(s[0]), float(s[0] + steps.sum())
        nv = len(p)
        rest = (run[-1] + 1 + np.arange(nv - len(run))) % nv
        chain = np.vstack([p.vertices[run[-1]], p.vertices[rest], p.vertices[run[0]]])
        return cls(c, p.vertices[rest], _vertex_normals(chain, closed=False), s_l, s_r, len(run) - 1)

    def _anchor(self, s_l, s_r):
        """Free vertices follow the contact points: vertex ``i`` is carried by
        the blend ``(1 - b_i) dP_R + b_i dP_L`` of the contact displacements,
        with ``b_i`` its arc-length fraction from the right contact."""
        self.ref = self.c.point(np.array([s_l, s_r]))
        chain = np.vstack([self.ref[1], self.base, self.ref[0]])
        cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(chain, axis=0), axis=1))])
        self.blend = cum[1:-1] / cum[-1]

    # -- geometry ------------------------------------------------------------
    def wall_params(self, theta):
        sl, sr = theta[-2], theta[-1]
        return sl + self.beta * (sr - sl)

    def vertices(self, theta) -> np.ndarray:
        q = self.base + theta[: self.nf, None] * self.dirs
        if not self.wetted:
            return q
        ends = self.c.point(theta[-2:]) - self.ref
        b = self.blend[:, None]
        q = q + (1.0 - b) * ends[1] + b * ends[0]
        return np.vstack([self.c.point(self.wall_params(theta)), q])

    def droplet(self, theta) -> PolyDroplet:
        v = self.vertices(theta)
        contact = np.zeros(self.M, dtype=bool)
        params = np.full(self.M, np.nan)
        if self.wetted:
            contact[: self.w + 1] = True
            params[: self.w + 1] = self.wall_params(theta)
        return PolyDroplet(v, contact, params, validate=False)

    def free_chain(self, v: np.ndarray) -> np.ndarray:
        if self.wetted:
            return np.vstack([v[self.w :], v[:1]])
        return v

    # -- energy ------------------------------------------------------------------
    def energy(self, theta, v=None) -> float:
        v = self.vertices(theta) if v is None else v
        d = v[self.free_b] - v[self.free_a]
        e = float(np.hypot(d[:, 0], d[:, 1]).sum())
        if self.wetted:
            e += float(self.c.sigma_integral(theta[-2], theta[-1]))
        if self.c.g is not None:
            from .energy import bulk_integral

            e += bulk_integral(v, self.c.g)
        return e

    def _bulk_gradient(self, v):
        if self.c.g is None:
            return np.zeros_like(v)
        a = v
        b = np.roll(v, -1, axis=0)
        d = b - a
        nrm = np.column_stack([d[:, 1], -d[:, 0]])
        ga = np.zeros(len(v))
        gb = np.zeros(len(v))
        for xi in _GAUSS2:
            gv = self.c.g_values(a + xi * d)
            ga += 0.5 * gv * (1.0 - xi)
            gb += 0.5 * gv * xi
        out = ga[:, None] * nrm
        out += np.roll(gb[:, None] * nrm, 1, axis=0)
        return out

    def derivatives(self, theta, hessian: bool = True):
        """Energy, area, their parameter gradients and (optionally) the
        parameter Hessian of the Lagrangian ``E - lam * A`` with the
        least-squares multiplier ``lam``."""
        c, M = self.c, self.M
        v = self.vertices(theta)
        fa, fb = self.free_a, self.free_b
        d = v[fb] - v[fa]
        ell = np.hypot(d[:, 0], d[:, 1])
        t = d / ell[:, None]
        gE = np.zeros((M, 2))
        np.add.at(gE, fb, t)
        np.add.at(gE, fa, -t)
        gE += self._bulk_gradient(v)
        nxt, prv = np.roll(v, -1, axis=0), np.roll(v, 1, axis=0)
        gA = 0.5 * np.column_stack([nxt[:, 1] - prv[:, 1], prv[:, 0] - nxt[:, 0]])
        energy = float(ell.sum())
        area = signed_area(v)

        rows, cols, vals = [], [], []
        q = self.qidx
        for comp in (0, 1):
            rows.append(2 * q + comp)
            cols.append(np.arange(self.nf))
            vals.append(self.dirs[:, comp])
        if self.wetted:
            s = self.wall_params(theta)
            tw = c.tangent(s)
            j = np.arange(self.w + 1)
            for col, wts in ((self.nf, 1.0 - self.beta), (self.nf + 1, self.beta)):
                for comp in (0, 1):
                    rows.append(2 * j + comp)
                    cols.append(np.full(self.w + 1, col))
                    vals.append(tw[:, comp] * wts)
            te = c.tangent(theta[-2:])
            for col, wts, k in ((self.nf, self.blend, 0), (self.nf + 1, 1.0 - self.blend, 1)):
                for comp in (0, 1):
                    rows.append(2 * q + comp)
                    cols.append(np.full(self.nf, col))
                    vals.append(te[k, comp] * wts)
            energy += float(c.sigma_integral(theta[-2], theta[-1]))
        if c.g is not None:
            from .energy import bulk_integral

            energy += bulk_integral(v, c.g)
        J = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * M, self.n)
        )
        g = J.T @ gE.ravel()
        a = J.T @ gA.ravel()
        if self.wetted:
            g[-2] -= float(c.sigma(theta[-2]))
            g[-1] += float(c.sigma(theta[-1]))
        lam = float(g @ a / (a @ a))
        if not hessian:
            return energy, area, g, a, lam, None

        # vertex-level Hessian of free length minus lam * area
        P = (np.eye(2)[None] - t[:, :, None] * t[:, None, :]) / ell[:, None, None]
        hr, hc, hv = [], [], []
        for (ia, ib, sign) in ((fa, fa, 1.0), (fb, fb, 1.0), (fa, fb, -1.0), (fb, fa, -1.0)):
            for r_ in (0, 1):
                for c_ in (0, 1):
                    hr.append(2 * ia + r_)
                    hc.append(2 * ib + c_)
                    hv.append(sign * P[:, r_, c_])
        i = np.arange(M)
        ip = (i + 1) % M
        half = 0.5 * lam
        for (r_, c_, val) in ((2 * i, 2 * ip + 1, -half), (2 * i + 1, 2 * ip, half)):
            hr += [r_, c_]
            hc += [c_, r_]
            hv += [np.full(M, val), np.full(M, val)]
        Hv = sparse.csr_matrix((np.concatenate(hv), (np.concatenate(hr), np.concatenate(hc))), shape=(2 * M, 2 * M))
        H = (J.T @ Hv @ J).toarray()
        if self.wetted:
            gL = gE - lam * gA
            kap = c.curvature(s)
            nin = np.column_stack([-tw[:, 1], tw[:, 0]])
            proj = (gL[: self.w + 1] * nin).sum(1) * kap
            b0, b1 = 1.0 - self.beta, self.beta
            H[-2, -2] += float(np.sum(proj * b0 * b0)) - float(c.sigma_slope(theta[-2]))
            H[-1, -1] += float(np.sum(proj * b1 * b1)) + float(c.sigma_slope(theta[-1]))
            off = float(np.sum(proj * b0 * b1))
            # carried free vertices see the wall curvature at the contact points
            ke = c.curvature(theta[-2:])
            ne = np.column_stack([-te[:, 1], te[:, 0]])
            gq = gL[self.qidx]
            H[-2, -2] += float(ke[0] * np.sum((gq @ ne[0]) * self.blend))
            H[-1, -1] += float(ke[1] * np.sum((gq @ ne[1]) * (1.0 - self.blend)))
            H[-2, -1] += off
            H[-1, -2] += off
        return energy, area, g, a, lam, H

    # -- constraints -------------------------------------------------------------
    def restore_area(self, theta, m: float, tol: float = 1e-14):
        th = theta.copy()
        for _ in range(50):
            v = self.vertices(th)
            a = signed_area(v)
            if abs(a - m) <= tol * m:
                return th
            nxt, prv = np.roll(v, -1, axis=0), np.roll(v, 1, axis=0)
            gA = 0.5 * np.column_stack([nxt[:, 1] - prv[:, 1], prv[:, 0] - nxt[:, 0]])
            slope = float(np.sum(gA[self.qidx] * self.dirs))
            if slope == 0.0:
                return None
            th[: self.nf] -= (a - m) / slope
        v = self.vertices(th)
        return th if abs(signed_area(v) - m) <= 1e-12 * m else None

    def check(self, theta, v) -> str | None:
        """Reason the configuration is inadmissible, or None."""
        c = self.c
        if self.wetted:
            span = theta[-1] - theta[-2]
            if span <= 0 or (c.closed and span >= 0.5 * c.length):
                return "wetted arc collapsed"
        if not shapely.is_simple(shapely.linearrings(v)):
            return "self-intersection"
        if signed_area(v) <= 0:
            return "orientation"
        q = v[self.qidx]
        guess = None
        if self.wetted:
            guess = np.full(len(q), 0.5 * (theta[-2] + theta[-1]))
        if not np.all(c.contains(q, s_guess=guess)):
            return "left container"
        if self.pinched(v):
            return "pinch-off"
        return None

    def pinched(self, v) -> bool:
        chain = self.free_chain(v)
        d = np.linalg.norm(np.diff(chain, axis=0), axis=1)
        pairs = cKDTree(chain).query_pairs(0.1 * float(d.mean()), output_type="ndarray")
        if len(pairs) == 0:
            return False
        gap = np.abs(pairs[:, 0] - pairs[:, 1])
        if not self.wetted:
            gap = np.minimum(gap, len(chain) - gap)
        return bool(np.any(gap >= 2))

    def remesh(self, theta, m: float):
        """Redistribute the free vertices at equal arc length along the
        current free boundary and reset the offsets."""
        v = self.vertices(theta)
        chain = self.free_chain(v)
        if not self.wetted:
            chain = np.vstack([chain, chain[:1]])
        seg = np.linalg.norm(np.diff(chain, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        n_inner = self.nf if self.wetted else self.nf
        if self.wetted:
            targets = cum[-1] * np.arange(1, n_inner + 1) / (n_inner + 1)
        else:
            targets = cum[-1] * np.arange(n_inner) / n_inner
        new = np.column_stack([np.interp(targets, cum, chain[:, 0]), np.interp(targets, cum, chain[:, 1])])
        if self.wetted:
            dirs = _vertex_normals(np.vstack([chain[0], new, chain[-1]]), closed=False)
        else:
            dirs = _vertex_normals(new, closed=True)
        self.base, self.dirs = new, dirs
        if self.wetted:
            self._anchor(theta[-2], theta[-1])
        th = theta.copy()
        th[: self.nf] = 0.0
        return self.restore_area(th, m)


# ---------------------------------------------------------------------------
# descent


def _newton_direction(g, a, H, lam):
    """KKT step for ``min E`` on ``{A = const}`` with an augmented Hessian."""
    n = len(g)
    gT = g - lam * a
    diag = float(np.mean(np.abs(np.diag(H)))) or 1.0
    aa = float(a @ a)
    rho, mu = 0.0, 1e-10 * diag
    for attempt in range(16):
        Haug = H + rho * np.outer(a, a) + mu * np.eye(n)
        try:
            cf = linalg.cho_factor(Haug, check_finite=False)
        except linalg.LinAlgError:
            cf = None
        if cf is not None:
            hg = linalg.cho_solve(cf, gT, check_finite=False)
            ha = linalg.cho_solve(cf, a, check_finite=False)
            nu = -(a @ hg) / (a @ ha)
            step = -(hg + nu * ha)
            if np.all(np.isfinite(step)) and gT @ step < 0:
                return step, True
        if attempt < 5:
            rho = diag / aa * n if rho == 0 else 10 * rho
        else:
            mu *= 100.0
    return -gT, False


def _run_chain(chain: _Chain, cfg: MinimizeConfig):
    m = cfg.volume
    theta = chain.restore_area(chain.theta, m)
    if theta is None:
        raise ValueError("could not restore the target area on the seed")
    v = chain.vertices(theta)
    bad = chain.check(theta, v)
    if bad is not None:
        raise ValueError(f"inadmissible seed: {bad}")
    history = [chain.energy(theta, v)]
    remeshes: list[int] = []
    converged = False
    message = ""
    gnorm = math.inf
    lam = float("nan")
    it = 0
    for it in range(1, cfg.max_iters + 1):
        e0, _, g, a, lam, H = chain.derivatives(theta)
        gT = g - lam * a
        gnorm = float(np.max(np.abs(gT)))
        if gnorm <= cfg.grad_tol:
            converged = True
            it -= 1
            break
        step, newton = _newton_direction(g, a, H, lam)
        # cap the largest vertex displacement at a fifth of the droplet size
        size = diameter(chain.free_chain(chain.vertices(theta)))
        disp = float(np.max(np.abs(step[: chain.nf])))
        if chain.wetted:
            disp = max(disp, float(np.max(np.abs(step[-2:]))))
        if disp > 0.2 * size:
            step *= 0.2 * size / disp
        slope = float(gT @ step)
        floor = energy_floor(e0, chain.vertices(theta))
        if -slope <= floor:
            # The predicted decrease is below what the energy sum resolves, so
            # the Armijo test is meaningless; take the full Newton step when it
            # reduces the projected gradient without raising the energy by more
            # than rounding.
            trial = chain.restore_area(theta + step, m) if newton else None
            ok = False
            if trial is not None:
                vt = chain.vertices(trial)
                if chain.check(trial, vt) is None:
                    et = chain.energy(trial, vt)
                    _, _, g1, a1, lam1, _ = chain.derivatives(trial, hessian=False)
                    g1norm = float(np.max(np.abs(g1 - lam1 * a1)))
                    ok = et <= e0 + floor and g1norm < gnorm
                    log.debug("rounding-level step: dE %.3e floor %.3e gradient %.3e -> %.3e", et - e0, floor, gnorm, g1norm)
            if not ok:
                converged = gnorm <= 10.0 * cfg.grad_tol
                message = f"energy stationary to rounding with projected gradient {gnorm:.3e}"
                it -= 1
                break
            theta = trial
            history.append(et)
            continue
        alpha = cfg.initial_step
        accepted = False
        reason = None
        for _ in range(cfg.max_backtracks):
            trial = chain.restore_area(theta + alpha * step, m)
            if trial is not None:
                vt = chain.vertices(trial)
                reason = chain.check(trial, vt)
                if reason is None:
                    et = chain.energy(trial, vt)
                    if et <= e0 + cfg.armijo * alpha * slope:
                        accepted = True
                        break
                    reason = "armijo"
            else:
                reason = "area restoration failed"
            alpha *= cfg.shrink
        if not accepted:
            if reason == "pinch-off":
                raise PinchOffError(f"free boundary pinched at iteration {it}")
            message = f"line search failed ({reason}) with projected gradient {gnorm:.3e}"
            break
        if et > history[-1] + energy_floor(history[-1], vt):
            raise AssertionError("accepted step increased the energy")
        theta = trial
        history.append(et)
        if it % cfg.remesh_interval == 0:
            new = chain.remesh(theta, m)
            if new is not None and chain.check(new, chain.vertices(new)) is None:
                theta = new
                remeshes.append(len(history))
                history.append(chain.energy(theta))
    else:
        e0, _, g, a, lam, _ = chain.derivatives(theta, hessian=False)
        gnorm = float(np.max(np.abs(g - lam * a)))
        converged = gnorm <= cfg.grad_tol
        if not converged:
            message = f"max_iters reached with projected gradient {gnorm:.3e}"
    return theta, dict(
        converged=converged, iterations=it, history=history, remeshes=remeshes, grad_norm=gnorm, multiplier=lam, message=message
    )


def contact_residuals(p: PolyDroplet, c: Container) -> list[float]:
    """``|nu_A . nu_E - sigma|`` at both ends of the wetted arc, using the
    outward normal of the adjacent free edge."""
    run = p.contact_run
    if len(run) == 0:
        return []
    v = p.vertices
    nv = len(v)
    out = []
    for idx, edge_from in ((run[-1], run[-1]), (run[0], (run[0] - 1) % nv)):
        d = v[(edge_from + 1) % nv] - v[edge_from]
        nu_e = np.array([d[1], -d[0]]) / math.hypot(d[0], d[1])
        s = p.params[idx]
        nu_a = c.outward_normal(s)
        out.append(abs(float(nu_a @ nu_e) - float(c.sigma(s))))
    return out


def _result(chain: _Chain, theta, c: Container, info: dict) -> MinimizeResult:
    drop = chain.droplet(theta)
    drop.validate()
    energy = gauss_energy(drop, c)
    if chain.wetted:
        s_mid = 0.5 * (theta[-2] + theta[-1])
        if c.closed:
            s_mid = float(np.mod(s_mid, c.length))
        point = c.point(s_mid)
    else:
        s_mid, point = None, None
    return MinimizeResult(
        droplet=drop,
        energy=energy,
        contact_point=point,
        contact_param=s_mid,
        young_residuals=contact_residuals(drop, c),
        **info,
    )


def minimize_from(c: Container, seed: PolyDroplet, cfg: MinimizeConfig) -> MinimizeResult:
    """Local descent from a single seed polygon."""
    chain = _Chain.from_droplet(seed, c)
    theta, info = _run_chain(chain, cfg)
    return _result(chain, theta, c, info)


def default_seeds(c: Container, cfg: MinimizeConfig) -> list:
    order = np.argsort(c.sigma_values, kind="stable")[: cfg.n_boundary_seeds]
    seeds: list = [{"kind": "boundary", "s": float(c.s_stations[i])} for i in order]
    if cfg.interior_seed and c.closed:
        seeds.append({"kind": "interior"})
    return seeds


def _materialize(seed, c: Container, cfg: MinimizeConfig, rng) -> PolyDroplet:
    if isinstance(seed, PolyDroplet):
        poly = seed
    else:
        kind = seed.get("kind", "boundary")
        if kind == "boundary":
            poly = seed_droplet(c, float(seed["s"]), seed.get("tau"), cfg.volume, cfg.vertex_count)
        elif kind == "interior":
            poly = interior_seed(c, cfg.volume, cfg.vertex_count, seed.get("center"))
        else:
            raise ValueError(f"unknown seed kind {kind!r}")
    if cfg.jitter > 0:
        size = diameter(poly.vertices)
        v = poly.vertices.copy()
        free = ~poly.contact
        v[free] += cfg.jitter * size * rng.standard_normal((int(free.sum()), 2))
        poly = PolyDroplet(v, poly.contact, poly.params)
    return poly


def _run_seed(c: Container, cfg: MinimizeConfig, idx: int, seed):
    rng = np.random.default_rng([cfg.rng_seed, idx])
    try:
        res = minimize_from(c, _materialize(seed, c, cfg, rng), cfg)
    except (ValueError, PinchOffError) as exc:
        log.warning("seed %d abandoned: %s", idx, exc)
        return None
    res.seed_index = idx
    return res


def minimize(c: Container, cfg: MinimizeConfig, jobs: int = 1) -> MinimizeResult:
    """Multi-start minimization; returns the lowest-energy seed's result.

    Seeds default to the ``n_boundary_seeds`` lowest-sigma stations plus one
    interior ball.  Interior seeds keep their topology (they never acquire
    contact).  Ties within 1e-9 relative energy go to the smaller seed index.
    Seeds run on ``jobs`` threads; each has its own RNG stream, so the result
    does not depend on ``jobs``.
    """
    if c.closed and cfg.volume >= c.area:
        raise ValueError(f"volume {cfg.volume:g} must be smaller than the container area {c.area:g}")
    seeds = list(cfg.seeds) if cfg.seeds is not None else default_seeds(c, cfg)
    if not seeds:
        raise ValueError("no seeds")
    if jobs > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(lambda item: _run_seed(c, cfg, *item), enumerate(seeds)))
    else:
        runs = [_run_seed(c, cfg, idx, seed) for idx, seed in enumerate(seeds)]
    best: MinimizeResult | None = None
    for res in runs:
        if res is None:
            continue
        if best is None:
            best = res
            continue
        e_b, e_r = best.energy.total, res.energy.total
        tie = abs(e_r - e_b) <= 1e-9 * abs(e_b)
        if (res.converged and not best.converged) or (not tie and e_r < e_b and res.converged >= best.converged):
            best = res
    if best is None:
        raise RuntimeError("every seed failed")
    best.seed_energies = [float("nan") if r is None else r.energy.total for r in runs]
    return best


def young_residual(r: MinimizeResult, c: Container) -> list[float]:
    return contact_residuals(r.droplet, c)


# ---------------------------------------------------------------------------
# almost-minimality


def _perturb(p: PolyDroplet, rng, rho0: float):
    v = p.vertices.copy()
    free = np.flatnonzero(~p.contact)
    centre = v[rng.choice(free)]
    rho = rho0 * rng.uniform(0.2, 1.0)
    dist = np.linalg.norm(v[free] - centre, axis=1)
    inside = dist < rho
    idx = free[inside]
    weight = (1.0 - (dist[inside] / rho) ** 2) ** 2
    nv = len(v)
    if rng.random() < 0.5:
        nxt, prv = v[(idx + 1) % nv], v[(idx - 1) % nv]
        t = nxt - prv
        normal = np.column_stack([t[:, 1], -t[:, 0]])
        normal /= np.linalg.norm(normal, axis=1, keepdims=True)
        amp = 0.25 * rho * rng.uniform(-1.0, 1.0) * rng.random() ** 2
        v[idx] += amp * weight[:, None] * normal
    else:
        nxt, prv = v[(idx + 1) % nv], v[(idx - 1) % nv]
        v[idx] += rng.uniform(0.0, 1.0) * weight[:, None] * (0.5 * (nxt + prv) - v[idx])
    return PolyDroplet(v, p.contact, p.params, validate=False)


def almost_minimality_probe(r: MinimizeResult | PolyDroplet, c: Container, trials: int, rho0: float, rng_seed: int = 0) -> float:
    """Empirical almost-minimality constant.

    Random local competitors modify free vertices inside balls of radius
    below ``rho0`` without preserving the area; the return value is the
    largest energy gain per unit symmetric-difference area, clipped at 0.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not rho0 > 0:
        raise ValueError("rho0 must be positive")
    p = r.droplet if isinstance(r, MinimizeResult) else r
    e0 = gauss_energy(p, c).total
    rng = np.random.default_rng(rng_seed)
    best = 0.0
    for _ in range(trials):
        q = _perturb(p, rng, rho0)
        try:
            q.validate()
            e1 = gauss_energy(q, c).total
        except ValueError:
            continue
        sd = symmetric_difference_area(p.vertices, q.vertices)
        if not sd > 1e-14 * abs(signed_area(p.vertices)):
            continue
        best = max(best, (e0 - e1) / sd)
    return best
