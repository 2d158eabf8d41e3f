import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from sfrc import materials as mm
from sfrc.errors import DomainError


def mura_eshelby(aspect, nu):
    """Eshelby components from Mura's elliptic integrals evaluated by quadrature."""
    axes = np.array([aspect, 1.0, 1.0])
    vol = axes.prod()

    def delta(s):
        return np.sqrt(np.prod(axes**2 + s))

    def I(*idx):
        f = lambda s: 1.0 / (np.prod([axes[i] ** 2 + s for i in idx]) * delta(s))
        val, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
        return 2.0 * math.pi * vol * val

    c = 8.0 * math.pi * (1.0 - nu)
    k = 1.0 - 2.0 * nu
    a2 = axes**2

    def iiii(i):
        return 3.0 / c * a2[i] * I(i, i) + k / c * I(i)

    def iijj(i, j):
        return a2[j] / c * I(i, j) - k / c * I(i)

    def ijij(i, j):
        return (a2[i] + a2[j]) / (2 * c) * I(i, j) + k / (2 * c) * (I(i) + I(j))

    return {"S1111": iiii(0), "S2222": iiii(1), "S2233": iijj(1, 2), "S2211": iijj(1, 0),
            "S1122": iijj(0, 1), "S2323": ijij(1, 2), "S1212": ijij(0, 1)}


@pytest.mark.parametrize("aspect", [0.3, 0.9, 1.5, 5.0, 23.85, 200.0])
@pytest.mark.parametrize("nu", [0.22, 0.41])
def test_eshelby_matches_quadrature(aspect, nu):
    closed = mm.eshelby_spheroid(aspect, nu)
    ref = mura_eshelby(aspect, nu)
    for key, val in ref.items():
        assert closed[key] == pytest.approx(val, abs=1e-9), key


def test_eshelby_long_fiber_limit():
    nu = 0.41
    S = mm.eshelby_spheroid(1e6, nu)
    # infinite cylinder values
    assert S["S1111"] == pytest.approx(0.0, abs=1e-6)
    assert S["S2222"] == pytest.approx((5 - 4 * nu) / (8 * (1 - nu)), rel=1e-6)
    assert S["S2233"] == pytest.approx((4 * nu - 1) / (8 * (1 - nu)), rel=1e-6)
    assert S["S2211"] == pytest.approx(nu / (2 * (1 - nu)), rel=1e-6)
    assert S["S1212"] == pytest.approx(0.25, rel=1e-6)


def test_eshelby_is_continuous_through_sphere():
    a = np.array([0.98, 0.995, 0.9999, 1.0, 1.0001, 1.005, 1.02])
    S = mm.eshelby_spheroid(a, 0.3)
    for vals in S.values():
        assert np.all(np.abs(np.diff(vals)) < 0.01)
    assert S["S1111"][3] == pytest.approx((7 - 5 * 0.3) / (15 * 0.7))


REFERENCE = {
    "tandon_weng": dict(e1=12.4, e2=3.99, g12=1.31, g23=1.26, nu12=0.379),
    "halpin_tsai": dict(e1=11.2, e2=4.12, g12=1.30, g23=1.25, nu12=0.375),
}


@pytest.mark.parametrize("model", sorted(REFERENCE))
def test_reference_composite_constants(model):
    c = mm.MODELS[model](mm.PBT, mm.GLASS, 260.0 / 10.9, 0.1822)
    for key, ref in REFERENCE[model].items():
        tol = 0.005 if key == "nu12" else 0.05
        assert getattr(c, key) == pytest.approx(ref, abs=tol), key


@pytest.mark.parametrize("model", sorted(mm.MODELS))
def test_zero_fraction_gives_matrix(model):
    c = mm.MODELS[model](mm.PBT, mm.GLASS, 20.0, 0.0)
    G = mm.PBT.shear_modulus
    assert c.e1 == pytest.approx(2.6)
    assert c.e2 == pytest.approx(2.6)
    assert c.g12 == pytest.approx(G)
    assert c.g23 == pytest.approx(G)
    assert c.nu12 == pytest.approx(0.41)


def test_tandon_weng_stiffens_with_aspect_ratio():
    a = np.array([2.0, 5.0, 20.0, 100.0])
    c = mm.tandon_weng_constants(mm.PBT, mm.GLASS, a, 0.1822)
    assert np.all(np.diff(c.e1) > 0)
    assert np.all(c.e1 >= c.e2)


def test_nearly_identical_phases_are_transparent():
    fiber = mm.IsotropicMaterial(2.6 * (1 + 1e-7), 0.41, 2000.0)
    c = mm.tandon_weng_constants(mm.PBT, fiber, 10.0, 0.3)
    assert c.e1 == pytest.approx(2.6, rel=1e-5)
    assert c.e2 == pytest.approx(2.6, rel=1e-5)
    assert c.nu12 == pytest.approx(0.41, rel=1e-5)


def test_identical_phases_rejected():
    with pytest.raises(DomainError):
        mm.tandon_weng_constants(mm.PBT, mm.PBT, 10.0, 0.3)


def test_invariants(aligned_constants):
    c = aligned_constants
    assert c.nu21 == pytest.approx(c.nu12 * c.e2 / c.e1)
    assert c.nu12 * c.nu21 < 1
    assert c.nu23 == pytest.approx(c.e2 / (2 * c.g23) - 1)


@pytest.mark.parametrize("bad", [dict(aspect_ratio=0.0, phi=0.1), dict(aspect_ratio=10, phi=1.0),
                                 dict(aspect_ratio=10, phi=-0.1)])
def test_geometry_domain(bad):
    with pytest.raises(DomainError):
        mm.tandon_weng_constants(mm.PBT, mm.GLASS, **bad)


def test_plane_stress_matrix_reference_values(orthotropic_matrix):
    m = orthotropic_matrix
    assert m["11"] == pytest.approx(13.0, abs=0.05)
    assert m["12"] == pytest.approx(1.59, abs=0.05)
    assert m["22"] == pytest.approx(4.18, abs=0.05)
    assert m["66"] == pytest.approx(1.31, abs=0.05)
    assert m["16"] == 0 and m["26"] == 0


@pytest.mark.parametrize("state", mm.STATES)
def test_isotropic_state_matrices(state):
    E, nu = 2.6, 0.41
    c = mm.EngineeringConstants(E, E, E / (2 * (1 + nu)), nu, g23=E / (2 * (1 + nu)))
    np.testing.assert_allclose(mm.state_matrix(c, state).entries,
                               mm.isotropic_stiffness(E, nu, state), rtol=1e-12)


def test_plane_strain_stiffer_than_plane_stress(aligned_constants):
    ps = mm.plane_stress_matrix(aligned_constants)
    pe = mm.plane_strain_matrix(aligned_constants)
    assert pe["11"] > ps["11"] and pe["22"] > ps["22"]
    assert pe["66"] == pytest.approx(ps["66"])


def test_plane_strain_needs_g23():
    c = mm.EngineeringConstants(10.0, 4.0, 1.3, 0.38)
    with pytest.raises(DomainError):
        mm.plane_strain_matrix(c)


def test_rotation_by_ninety_swaps_axes(orthotropic_matrix):
    r = mm.rotate_matrix(orthotropic_matrix, 90.0)
    assert r["11"] == pytest.approx(orthotropic_matrix["22"])
    assert r["22"] == pytest.approx(orthotropic_matrix["11"])
    assert r["16"] == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-180, 180))
def test_rotation_round_trip(theta):
    m = mm.plane_stress_matrix(mm.tandon_weng_constants(mm.PBT, mm.GLASS, 23.85, 0.1822))
    back = mm.rotate_matrix(mm.rotate_matrix(m, theta), -theta)
    np.testing.assert_allclose(back.entries, m.entries, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-90, 90))
def test_rotation_preserves_energy_invariants(theta):
    m = mm.plane_stress_matrix(mm.tandon_weng_constants(mm.PBT, mm.GLASS, 23.85, 0.1822))
    r = mm.rotate_matrix(m, theta)
    # Mandel form of an engineering-shear Voigt matrix has rotation-invariant eigenvalues
    w = np.diag([1.0, 1.0, 2.0])
    ev0 = np.sort(np.linalg.eigvals(np.sqrt(w) @ m.entries @ np.sqrt(w)).real)
    ev1 = np.sort(np.linalg.eigvals(np.sqrt(w) @ r.entries @ np.sqrt(w)).real)
    np.testing.assert_allclose(ev1, ev0, rtol=1e-10)
    np.testing.assert_allclose(r.entries, r.entries.T, atol=1e-12)


def test_rotation_broadcasts(orthotropic_matrix):
    theta = np.linspace(-90, 90, 7)
    r = mm.rotate_matrix(orthotropic_matrix, theta)
    assert r.entries.shape == (7, 3, 3)
    np.testing.assert_allclose(r.entries[3], orthotropic_matrix.entries)


def test_plane_stress_extraction_round_trip(aligned_constants):
    c = mm.extract_constants_plane_stress(mm.plane_stress_matrix(aligned_constants))
    for key in ("e1", "e2", "g12", "nu12"):
        assert getattr(c, key) == pytest.approx(getattr(aligned_constants, key), rel=1e-12)


def test_plane_strain_extraction_round_trip(aligned_constants):
    m = mm.plane_strain_matrix(aligned_constants)
    c = mm.extract_constants_plane_strain(m, aligned_constants.nu23)
    for key in ("e1", "e2", "g12", "nu12"):
        assert getattr(c, key) == pytest.approx(getattr(aligned_constants, key), rel=1e-10)


def test_extraction_rejects_wrong_state(aligned_constants):
    with pytest.raises(DomainError):
        mm.extract_constants_plane_stress(mm.plane_strain_matrix(aligned_constants))


def test_rotated_e1_drops_off_axis(orthotropic_matrix):
    c45 = mm.extract_constants_plane_stress(mm.rotate_matrix(orthotropic_matrix, 45.0))
    c90 = mm.extract_constants_plane_stress(mm.rotate_matrix(orthotropic_matrix, 90.0))
    e0 = mm.extract_constants_plane_stress(orthotropic_matrix).e1
    assert c90.e1 < e0
    assert c45.e1 < e0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0))
def test_fraction_conversion_round_trip(phi_m):
    phi = mm.mass_to_volume_fraction(phi_m, 2500.0, 1300.0)
    assert mm.volume_to_mass_fraction(phi, 2500.0, 1300.0) == pytest.approx(phi_m, abs=1e-12)


def test_reference_mass_fraction():
    assert mm.mass_to_volume_fraction(0.30, 2500.0, 1300.0) == pytest.approx(0.1822, abs=5e-4)


@pytest.mark.parametrize("kw", [dict(young_modulus=0, poisson_ratio=0.3, density=1),
                                dict(young_modulus=1, poisson_ratio=0.5, density=1),
                                dict(young_modulus=1, poisson_ratio=0.3, density=0)])
def test_isotropic_material_validation(kw):
    with pytest.raises(DomainError):
        mm.IsotropicMaterial(**kw)


def test_matrix_label_access(orthotropic_matrix):
    assert orthotropic_matrix["12"] == orthotropic_matrix.entries[0, 1]
    assert orthotropic_matrix["66"] == orthotropic_matrix.entries[2, 2]
    with pytest.raises(DomainError):
        mm.ElasticityMatrix2D(np.eye(2))
