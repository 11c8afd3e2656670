import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from capdrop.geometry import PolyDroplet, polygon_area
from capdrop.sessile import (
    CapGeometry,
    IdealDroplet,
    anisotropic_energy,
    ball_volume,
    cap_base_area,
    cap_lateral_area,
    cap_scalars,
    cap_volume,
    ideal_cap_arc,
    ideal_droplet_boundary,
    phi_aux,
    psi,
    psi_prime,
    support_function,
)


def omega(k):
    return math.pi ** (k / 2) / special.gamma(k / 2 + 1)


def rho_volume(n, tau):
    # integrate directly in the height variable rho, no angular substitution
    val, _ = integrate.quad(lambda r: (1 - r * r) ** ((n - 1) / 2), -tau, 1, epsabs=1e-14, epsrel=1e-13)
    return omega(n - 1) * val


def segment_area(tau):
    # area of the unit disk above the chord x2 = -tau, via shapely-free geometry
    h = 1 + tau
    return math.acos(1 - h) - (1 - h) * math.sqrt(2 * h - h * h)


def test_volume_anchors():
    assert cap_volume(CapGeometry(2, 0.0)) == pytest.approx(math.pi / 2, rel=1e-12)
    assert cap_volume(CapGeometry(3, 0.0)) == pytest.approx(2 * math.pi / 3, rel=1e-12)
    v = math.pi / 2 + math.asin(0.5) + 0.5 * math.sqrt(0.75)
    assert cap_volume(CapGeometry(2, 0.5)) == pytest.approx(v, rel=1e-10)
    assert v == pytest.approx(2.52740, abs=1e-5)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
@pytest.mark.parametrize("tau", [-0.95, -0.3, 0.0, 0.41, 0.97])
def test_volume_matches_height_quadrature(n, tau):
    assert cap_volume(CapGeometry(n, tau)) == pytest.approx(rho_volume(n, tau), rel=1e-10)


@pytest.mark.parametrize("tau", np.linspace(-0.99, 0.99, 23))
def test_planar_volume_is_disk_segment(tau):
    assert cap_volume(CapGeometry(2, tau)) == pytest.approx(segment_area(tau), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("tau", np.linspace(-0.98, 0.98, 15))
def test_closed_forms_agree_with_quadrature(n, tau):
    g = CapGeometry(n, tau)
    assert cap_volume(g, "closed") == pytest.approx(cap_volume(g), rel=1e-10)
    assert cap_lateral_area(g, "closed") == pytest.approx(cap_lateral_area(g), rel=1e-10)


def test_closed_form_unavailable_in_higher_dimension():
    with pytest.raises(ValueError):
        cap_volume(CapGeometry(4, 0.0), "closed")


def test_lateral_area_anchors():
    assert cap_lateral_area(CapGeometry(2, 0.0)) == pytest.approx(math.pi, rel=1e-12)
    assert cap_lateral_area(CapGeometry(2, 0.5)) == pytest.approx(math.pi + 2 * math.asin(0.5), rel=1e-10)
    assert cap_lateral_area(CapGeometry(3, 0.0)) == pytest.approx(2 * math.pi, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_half_ball_area_is_n_times_volume(n):
    g = CapGeometry(n, 0.0)
    assert cap_lateral_area(g) == pytest.approx(n * cap_volume(g), rel=1e-10)


def test_base_area():
    assert cap_base_area(CapGeometry(2, 0.0)) == pytest.approx(2.0)
    assert cap_base_area(CapGeometry(2, 1 - 1e-12)) == pytest.approx(0.0, abs=1e-5)
    assert cap_base_area(CapGeometry(3, 0.6)) == pytest.approx(math.pi * 0.64, rel=1e-12)


def test_psi_anchors():
    assert psi(CapGeometry(2, 0.0)) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert psi(CapGeometry(2, 1 - 1e-9)) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-5)
    assert psi(CapGeometry(2, -0.5)) < psi(CapGeometry(2, 0.5))


@pytest.mark.parametrize("tau", [-0.7, 0.0, 0.5, 0.9])
def test_planar_psi_is_twice_root_volume(tau):
    # in the plane A + tau A0 = 2 V, so psi = 2 sqrt(V)
    g = CapGeometry(2, tau)
    assert psi(g) == pytest.approx(2 * math.sqrt(cap_volume(g)), rel=1e-12)


def test_psi_prime_at_zero():
    g = CapGeometry(2, 0.0)
    expected = 2 * math.pi / (2 * (math.pi / 2) ** 1.5)
    assert psi_prime(g) == pytest.approx(expected, rel=1e-12)
    assert psi_prime(g) == pytest.approx(1.59577, abs=1e-5)
    assert psi_prime(g) == pytest.approx(cap_base_area(g) / math.sqrt(cap_volume(g)), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_phi_at_zero(n):
    assert phi_aux(CapGeometry(n, 0.0)) == pytest.approx(n * ball_volume(n) / 2, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("tau", [-0.8, -0.2, 0.3, 0.85])
def test_psi_prime_matches_finite_difference(n, tau):
    h = 1e-5
    fd = (psi(CapGeometry(n, tau + h)) - psi(CapGeometry(n, tau - h))) / (2 * h)
    assert psi_prime(CapGeometry(n, tau)) == pytest.approx(fd, rel=1e-6)


@given(st.integers(2, 6), st.floats(-0.99, 0.99))
@settings(max_examples=60, deadline=None)
def test_scalar_invariants(n, tau):
    s = cap_scalars(CapGeometry(n, tau))
    assert s.psi == pytest.approx((s.lateral_area + tau * s.base_area) / s.volume ** ((n - 1) / n), rel=1e-12)
    assert s.psi_prime == pytest.approx(s.base_area * s.phi / (n * s.volume ** (2 - 1 / n)), rel=1e-12)
    assert s.phi > 0 and s.psi_prime > 0 and s.psi > 0


@pytest.mark.parametrize("bad", [(1, 0.0), (2, 1.0), (2, -1.0), (3, 1.5), (2.5, 0.0)])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        CapGeometry(*bad)


def sample_cap(tau, count, rng):
    pts = rng.uniform(-1, 1, (4 * count, 2))
    keep = (np.hypot(pts[:, 0], pts[:, 1]) < 1) & (pts[:, 1] > -tau)
    return pts[keep][:count]


def brute_support(tau, nu):
    # boundary of S(tau): the arc plus the chord at height -tau
    t = np.linspace(-math.asin(tau), math.pi + math.asin(tau), 400001)
    arc = np.column_stack([np.cos(t), np.sin(t)])
    return float(np.max(arc @ nu))


def test_support_function_examples():
    g = CapGeometry(2, 0.3)
    assert support_function(g, [1.0, 0.0]) == 1.0
    assert support_function(g, [0.0, -1.0]) == pytest.approx(0.3, abs=1e-15)
    assert support_function(g, [0.0, -1.0]) == pytest.approx(brute_support(0.3, np.array([0.0, -1.0])), abs=1e-9)
    g = CapGeometry(2, -0.5)
    nu = np.array([0.8, -0.6])
    assert support_function(g, nu) == pytest.approx(math.sqrt(0.75) * 0.8 - 0.3, abs=1e-12)
    assert support_function(g, nu) == pytest.approx(brute_support(-0.5, nu), abs=1e-9)


def test_support_function_rejects_non_unit():
    with pytest.raises(ValueError):
        support_function(CapGeometry(2, 0.0), [1.0, 1.0])


@pytest.mark.parametrize("tau", [-0.6, 0.0, 0.45])
def test_support_function_dominates_and_is_attained(tau):
    rng = np.random.default_rng(7)
    g = CapGeometry(2, tau)
    x = sample_cap(tau, 10_000, rng)
    ang = rng.uniform(0, 2 * math.pi, 64)
    nus = np.column_stack([np.cos(ang), np.sin(ang)])
    h = support_function(g, nus)
    assert np.all(x @ nus.T <= h[None, :] + 1e-12)
    for nu, val in zip(nus, h):
        assert val == pytest.approx(brute_support(tau, nu), abs=1e-6)


def test_anisotropic_energy_of_square():
    sq = PolyDroplet([[0, 0], [1, 0], [1, 1], [0, 1]])
    assert anisotropic_energy(CapGeometry(2, 0.0), sq) == pytest.approx(3.0, abs=1e-15)


@pytest.mark.parametrize("tau", [-0.6, 0.0, 0.6])
def test_polygonal_cap_calibrates_psi(tau):
    g = CapGeometry(2, tau)
    k = ideal_droplet_boundary(IdealDroplet(g), 4096)
    assert anisotropic_energy(g, k) == pytest.approx(psi(g), rel=1e-4)


def test_anisotropic_energy_translation_invariant():
    g = CapGeometry(2, 0.2)
    k = ideal_droplet_boundary(IdealDroplet(g), 512)
    moved = PolyDroplet(k.vertices + [3.25, 0.0], k.contact, k.params + 3.25)
    assert anisotropic_energy(g, moved) == pytest.approx(anisotropic_energy(g, k), rel=1e-13)


def test_anisotropic_energy_rejects_bowtie():
    with pytest.raises(ValueError):
        anisotropic_energy(CapGeometry(2, 0.0), PolyDroplet([[0, 0], [1, 1], [1, 0], [0, 1]], validate=False))


@pytest.mark.parametrize("tau", [-0.8, 0.0, 0.7])
def test_ideal_boundary_shape(tau):
    coarse = ideal_droplet_boundary(IdealDroplet(CapGeometry(2, tau)), 64)
    fine = ideal_droplet_boundary(IdealDroplet(CapGeometry(2, tau)), 4096)
    assert abs(polygon_area(fine) - 1) < abs(polygon_area(coarse) - 1)
    assert polygon_area(fine) == pytest.approx(1.0, abs=1e-5)
    for poly in (coarse, fine):
        assert np.all(poly.vertices[poly.contact, 1] == 0.0)
        assert np.all(poly.vertices[~poly.contact, 1] > 0)
    low = [p.vertices[~p.contact, 1].min() for p in (coarse, fine)]
    assert low[1] < low[0]


def test_half_disk_at_four_segments():
    p = ideal_droplet_boundary(IdealDroplet(CapGeometry(2, 0.0)), 4)
    radius = math.sqrt(2 / math.pi)
    assert np.allclose(np.hypot(*p.vertices.T).max(), radius)
    assert p.vertices[0] == pytest.approx([-radius, 0.0])


def test_scaled_droplet_area():
    d = IdealDroplet(CapGeometry(2, 0.3), r=0.2, z=1.5)
    p = ideal_droplet_boundary(d, 4096)
    assert polygon_area(p) == pytest.approx(0.04, rel=1e-5)
    arc = ideal_cap_arc(d)
    assert arc[0, 1] == arc[-1, 1] == 0.0


def test_polygons_need_planar_geometry():
    with pytest.raises(NotImplementedError):
        ideal_droplet_boundary(IdealDroplet(CapGeometry(3, 0.0)), 64)
