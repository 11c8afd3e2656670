"""Small-volume experiments: mass sweeps with warm starts, the expansion of
the minimal energy, scaling fits and the half-plane stability probe."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, Sequence

import numpy as np
import shapely
from scipy import optimize, stats

from .container import Container, blow_up, chart_at
from .geometry import PolyDroplet, diameter, hausdorff_distance, signed_area, symmetric_difference_area
from .minimizer import MinimizeConfig, MinimizeResult, chart_image, minimize
from .sessile import CapGeometry, IdealDroplet, anisotropic_energy, cap_volume, ideal_cap_arc, ideal_droplet_boundary, psi
from .energy import half_space_energy

__all__ = [
    "SweepRecord",
    "FitReport",
    "sweep",
    "sweep_records_csv",
    "record_passes",
    "largest_passing_mass",
    "fit_gamma_expansion",
    "scaling_check",
    "blowup_distance",
    "stretch_family",
    "bump_family",
    "stability_probe",
]


@dataclass(frozen=True)
class SweepRecord:
    m: float
    gamma: float
    normalized_gamma: float
    p_x: float
    p_y: float
    p_param: float
    sigma0: float
    sigma_gap: float
    diameter: float
    hd_blowup: float
    young_max: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class FitReport:
    intercept: float
    slope: float
    r_squared: float
    passed: bool


# ---------------------------------------------------------------------------
# sweeps


def blowup_distance(r: MinimizeResult, c: Container, tau: float) -> float:
    """Hausdorff distance between the blown-up free boundary and the free arc
    of ``K(tau)``, minimized over the reflection ``x1 -> -x1``."""
    chart = chart_at(c, r.contact_param)
    q = blow_up(r.droplet, chart, math.sqrt(signed_area(r.droplet.vertices)))
    free = q.free_polyline()
    arc = ideal_cap_arc(IdealDroplet(CapGeometry(2, tau)))
    mirrored = free * np.array([-1.0, 1.0])
    return min(hausdorff_distance(free, arc), hausdorff_distance(mirrored, arc))


def _warm_start(r: MinimizeResult, c: Container, m: float) -> PolyDroplet:
    chart = chart_at(c, r.contact_param)
    q = blow_up(r.droplet, chart, 1.0)
    return chart_image(PolyDroplet(q.vertices, q.contact, q.params, validate=False), chart, m)


def _record(r: MinimizeResult, c: Container, m: float) -> SweepRecord:
    sigma0 = c.sigma_min
    gamma = r.energy.total
    if r.contact_param is None:
        # a detached droplet has no contact point; keep the row, flag it
        nan = float("nan")
        return SweepRecord(m, gamma, gamma / math.sqrt(m), nan, nan, nan, sigma0, nan, diameter(r.droplet.vertices),
                           nan, nan, False, r.iterations)
    p = c.point(r.contact_param)
    return SweepRecord(
        m=m,
        gamma=gamma,
        normalized_gamma=gamma / math.sqrt(m),
        p_x=float(p[0]),
        p_y=float(p[1]),
        p_param=float(r.contact_param),
        sigma0=sigma0,
        sigma_gap=float(c.sigma(r.contact_param)) - sigma0,
        diameter=diameter(r.droplet.vertices),
        hd_blowup=blowup_distance(r, c, sigma0),
        young_max=max(r.young_residuals),
        converged=bool(r.converged),
        iterations=int(r.iterations),
    )


def sweep(c: Container, masses: Sequence[float], cfg: MinimizeConfig, results: list | None = None, jobs: int = 1) -> list[SweepRecord]:
    """One record per mass, largest first.

    The first mass uses the multi-start search of ``cfg``; each later mass
    starts from the previous minimizer pushed through the chart at its
    contact point with the scale adjusted to the new mass.  Non-converged
    masses stay in the output with ``converged=False``.
    """
    masses = [float(m) for m in masses]
    if not masses:
        raise ValueError("need at least one mass")
    if any(b >= a for a, b in zip(masses, masses[1:])):
        raise ValueError("masses must be strictly decreasing")
    if c.closed and masses[0] >= 0.25 * c.area:
        raise ValueError("masses must lie below a quarter of the container area")
    if np.max(np.abs(c.sigma(c.s_stations))) > 0.9:
        # contact-line convergence is untested for near-complete (de)wetting
        raise ValueError("sweeps are restricted to |sigma| <= 0.9")
    records = []
    prev: MinimizeResult | None = None
    for m in masses:
        if prev is None or prev.contact_param is None:
            run_cfg = replace(cfg, volume=m)
        else:
            run_cfg = replace(cfg, volume=m, seeds=[_warm_start(prev, c, m)])
        res = minimize(c, run_cfg, jobs=jobs)
        records.append(_record(res, c, m))
        if results is not None:
            results.append(res)
        prev = res
    return records


def sweep_records_csv(records: Iterable[SweepRecord], header: Sequence[str] = ()) -> str:
    """CSV text with ``#`` header lines; floats use ``repr`` so reruns are
    byte-identical."""
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    names = [f.name for f in fields(SweepRecord)]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for rec in records:
        row = asdict(rec)
        w.writerow([repr(row[k]) if isinstance(row[k], float) else str(row[k]) for k in names])
    return buf.getvalue()


def record_passes(r: SweepRecord, young_tol: float = 1e-2, gap_tol: float = 1e-12) -> bool:
    """Per-record checks: converged, finite, Young's law within ``young_tol``
    and a contact point no better than the minimum of sigma."""
    vals = (r.gamma, r.normalized_gamma, r.sigma_gap, r.diameter, r.hd_blowup, r.young_max)
    return (r.converged and all(math.isfinite(v) for v in vals) and r.young_max <= young_tol
            and r.sigma_gap >= -gap_tol)


def largest_passing_mass(records: Sequence[SweepRecord], **tols) -> float | None:
    """Largest mass from which every smaller swept mass passes
    :func:`record_passes`; ``None`` if the smallest one fails."""
    best = None
    for r in sorted(records, key=lambda r: r.m):
        if not record_passes(r, **tols):
            break
        best = r.m
    return best


# ---------------------------------------------------------------------------
# fits


def _linear_fit(x, y) -> tuple[float, float, float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot == 0.0 or ss_res <= 1e-28 * max(1.0, float(np.sum(y**2))):
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return float(res.intercept), float(res.slope), r2


def fit_gamma_expansion(records: Sequence[SweepRecord], sigma0: float | None = None, rel_tol: float = 0.03) -> FitReport:
    """Fit ``gamma / m^{1/2} = a + b m^{1/2}``; passes when ``a`` is within
    ``rel_tol`` of ``psi(sigma0)`` and ``r^2 >= 0.9``."""
    if len(records) < 4:
        raise ValueError("need at least 4 records")
    s0 = records[0].sigma0 if sigma0 is None else sigma0
    x = [math.sqrt(r.m) for r in records]
    y = [r.normalized_gamma for r in records]
    a, b, r2 = _linear_fit(x, y)
    target = psi(CapGeometry(2, s0))
    ok = abs(a - target) <= rel_tol * target and r2 >= 0.9 and all(r.converged for r in records)
    return FitReport(a, b, r2, bool(ok))


def scaling_check(records: Sequence[SweepRecord], field: str, exponent: float, slack: float = 0.1) -> FitReport:
    """Log-log fit of ``field`` against ``m``; passes when the fitted exponent
    is at least ``exponent - slack`` (the rates are upper bounds)."""
    if len(records) < 4:
        raise ValueError("need at least 4 records")
    vals = np.array([getattr(r, field) for r in records], dtype=float)
    if not np.all(vals > 0):
        raise ValueError(f"{field} must be positive for a log-log fit")
    a, b, r2 = _linear_fit(np.log([r.m for r in records]), np.log(vals))
    return FitReport(a, b, r2, bool(b >= exponent - slack))


# ---------------------------------------------------------------------------
# half-plane stability


def _renormalize(v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(signed_area(v))


def stretch_family(tau: float, samples: int, rng, lam=(1.01, 1.3), segments: int = 1024) -> list[PolyDroplet]:
    """Area-preserving stretches ``(x1, x2) -> (l x1, x2 / l)`` of ``K(tau)``."""
    base = ideal_droplet_boundary(IdealDroplet(CapGeometry(2, tau)), segments)
    out = []
    for l in rng.uniform(lam[0], lam[1], samples):
        v = _renormalize(base.vertices * np.array([l, 1.0 / l]))
        out.append(PolyDroplet(v, base.contact, np.where(base.contact, v[:, 0], np.nan)))
    return out


def bump_family(tau: float, samples: int, rng, amplitude=(0.01, 0.1), modes=(2, 6), segments: int = 1024) -> list[PolyDroplet]:
    """Radial bumps ``a sin(k pi u)`` of the free arc of ``K(tau)`` (``u`` the
    arc fraction), rescaled to unit area."""
    base = ideal_droplet_boundary(IdealDroplet(CapGeometry(2, tau)), segments)
    center = _arc_center(tau)
    free = np.flatnonzero(~base.contact)
    u = np.arange(1, len(free) + 1) / (len(free) + 1)
    out = []
    for _ in range(samples):
        amp = rng.uniform(*amplitude)
        k = int(rng.integers(modes[0], modes[1] + 1))
        v = base.vertices.copy()
        rel = v[free] - center
        v[free] += (amp * np.sin(k * math.pi * u))[:, None] * rel / np.linalg.norm(rel, axis=1, keepdims=True)
        v = _renormalize(v)
        out.append(PolyDroplet(v, base.contact, np.where(base.contact, v[:, 0], np.nan)))
    return out


def _arc_center(tau: float) -> np.ndarray:
    return np.array([0.0, tau / math.sqrt(cap_volume(CapGeometry(2, tau)))])


def _contains_half(f: PolyDroplet, k_ref: np.ndarray) -> bool:
    return bool(shapely.Polygon(f.vertices).buffer(1e-12).contains(shapely.Polygon(0.5 * k_ref)))


def _min_mismatch_1d(f: np.ndarray, k_ref: np.ndarray) -> float:
    def mis(z):
        return symmetric_difference_area(f, k_ref + np.array([z, 0.0]))

    span = float(np.ptp(f[:, 0]))
    zs = np.linspace(-0.25 * span, 0.25 * span, 41)
    vals = [mis(z) for z in zs]
    j = int(np.argmin(vals))
    h = zs[1] - zs[0]
    res = optimize.minimize_scalar(mis, bounds=(zs[j] - h, zs[j] + h), method="bounded", options={"xatol": 1e-9})
    return float(min(res.fun, vals[j]))


def _min_mismatch_2d(f: np.ndarray, k_ref: np.ndarray, z0: float = 0.0) -> float:
    def mis(w):
        return symmetric_difference_area(f, k_ref + w)

    starts = [np.array([z0, 0.0]), np.array([z0, 0.02]), np.array([z0, -0.02])]
    best = math.inf
    for w0 in starts:
        res = optimize.minimize(mis, w0, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 400})
        best = min(best, float(res.fun))
    return best


def stability_probe(tau: float, family="stretch", samples: int = 16, rng_seed: int = 0, form: str = "capillary",
                    segments: int = 1024, **family_kw) -> float:
    """Smallest ratio of energy excess to squared mismatch over a family.

    ``form="capillary"`` uses ``(F_tau(F) - psi(tau)) / inf_z |(F - z) ^ K|^2``
    with horizontal shifts; ``form="wulff"`` uses
    ``(Phi(F) - Phi(K)) / inf_w |F ^ (w + K)|^2`` over all planar shifts.
    Members are unit-area polygons that must contain ``K(tau) / 2``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if form not in ("capillary", "wulff"):
        raise ValueError(f"unknown form {form!r}")
    rng = np.random.default_rng(rng_seed)
    kind = family if isinstance(family, str) else family.get("kind")
    if not isinstance(family, str):
        family_kw = {**{k: v for k, v in family.items() if k != "kind"}, **family_kw}
    if kind == "stretch":
        members = stretch_family(tau, samples, rng, segments=segments, **family_kw)
    elif kind == "bump":
        members = bump_family(tau, samples, rng, segments=segments, **family_kw)
    else:
        raise ValueError(f"unknown family {kind!r}")
    geom = CapGeometry(2, tau)
    k_poly = ideal_droplet_boundary(IdealDroplet(geom), segments)
    k_ref = _renormalize(k_poly.vertices)
    k_poly = PolyDroplet(k_ref, k_poly.contact, np.where(k_poly.contact, k_ref[:, 0], np.nan))
    # excesses are measured against the same polygonal reference, so the
    # discretization of K cancels to first order
    ref_cap = half_space_energy(k_poly, tau)
    ref_wulff = anisotropic_energy(geom, k_poly)
    ratios = []
    for f in members:
        if not _contains_half(f, k_ref):
            raise ValueError("family member does not contain K(tau)/2")
        if form == "capillary":
            excess = half_space_energy(f, tau) - ref_cap
            mismatch = _min_mismatch_1d(f.vertices, k_ref)
        else:
            excess = anisotropic_energy(geom, f) - ref_wulff
            mismatch = _min_mismatch_2d(f.vertices, k_ref)
        if mismatch <= 0:
            continue
        ratios.append(excess / mismatch**2)
    if not ratios:
        raise ValueError("every member coincides with K(tau)")
    out = float(min(ratios))
    if not out > 0:
        raise ArithmeticError(f"non-positive stability ratio {out:g}")
    return out
