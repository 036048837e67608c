import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import trapezoid

from conftest import pear, schwarzschild_sphere
from weyl_forge import spectral
from weyl_forge.errors import DegenerateArea, InvalidCurve, PointOnSupport
from weyl_forge.profile_geometry import (BoundaryData, ProfileCurve, euclid_mean_curvature,
                                         flat_boundary_data, induced_boundary_data, normalize_z)


def test_flat_unit_sphere_data(flat, unit_sphere):
    d = induced_boundary_data(flat, unit_sphere)
    assert np.max(np.abs(d.alpha - 1.0)) <= 1e-10
    assert np.max(np.abs(d.beta - np.sin(d.theta))) <= 1e-10
    assert np.max(np.abs(d.H - 2.0)) <= 1e-10


@pytest.mark.parametrize("a", [0.5, 2.0, 7.0])
def test_flat_sphere_scaling(flat, a):
    d = induced_boundary_data(flat, ProfileCurve.sphere(a, 65))
    assert np.max(np.abs(d.alpha - a)) <= 1e-10 * a
    assert np.max(np.abs(d.beta - a * np.sin(d.theta))) <= 1e-10 * a
    assert np.max(np.abs(d.H - 2.0 / a)) <= 1e-10 / a


def test_schwarzschild_mean_curvature(schwarzschild1):
    a = 4.0
    d = induced_boundary_data(schwarzschild1, schwarzschild_sphere(a))
    assert np.max(np.abs(d.H - (2.0 / a) * np.sqrt(1.0 - 2.0 / a))) <= 1e-6
    assert np.max(np.abs(d.alpha - a)) <= 1e-8
    assert np.max(np.abs(d.beta - a * np.sin(d.theta))) <= 1e-8


def test_normalize_shifts_sphere_to_origin(flat):
    c = ProfileCurve.from_functions(np.sin, lambda t: np.cos(t) + 5.0)
    n = normalize_z(c, flat)
    assert np.max(np.abs(n.z - np.cos(n.theta))) <= 1e-12


def test_normalize_is_idempotent(flat):
    n = normalize_z(pear(), flat)
    assert np.max(np.abs(normalize_z(n, flat).z - n.z)) <= 1e-12


def test_normalize_pear_against_trapezoid(flat):
    t = np.linspace(0.0, np.pi, 200001)
    r = np.sin(t)
    z = np.cos(t) + 0.2 * np.cos(2 * t)
    w = np.hypot(np.cos(t), -np.sin(t) - 0.4 * np.sin(2 * t)) * r
    shift = -trapezoid(z * w, t) / trapezoid(w, t)
    c = pear()
    assert normalize_z(c, flat).z[0] - c.z[0] == pytest.approx(shift, abs=1e-8)


def test_normalize_degenerate_area():
    c = ProfileCurve(spectral.lobatto_theta(33), np.zeros(33), np.cos(spectral.lobatto_theta(33)))
    with pytest.raises((DegenerateArea, InvalidCurve)):
        normalize_z(c)


def test_euclid_mean_curvature_examples():
    assert np.allclose(euclid_mean_curvature(ProfileCurve.sphere(1.0, 65)), 2.0, atol=1e-10)
    assert np.allclose(euclid_mean_curvature(ProfileCurve.sphere(3.0, 65)), 2.0 / 3.0, atol=1e-10)
    # equator of the oblate ellipsoid: meridian curvature a/b^2 = 4 plus parallel 1/r = 1
    ob = ProfileCurve.from_functions(np.sin, lambda t: 0.5 * np.cos(t))
    assert euclid_mean_curvature(ob, np.pi / 2) == pytest.approx(5.0, abs=1e-6)


def test_oblate_mean_curvature_against_area_variation():
    # H = d(area)/d(volume) under normal offsets, by central differences
    ob = ProfileCurve.from_functions(np.sin, lambda t: 0.5 * np.cos(t), n=129)
    th = ob.theta
    nr, nz = ob.normal
    H = euclid_mean_curvature(ob)
    w = ob.r * ob.speed
    eps = 1e-5
    bump = np.exp(-((th - np.pi / 2) / 0.3) ** 2)

    def area(s):
        r = ob.r + s * bump * nr
        z = ob.z + s * bump * nz
        return spectral.integrate(r * np.hypot(spectral.deriv(r), spectral.deriv(z)))

    dA = (area(eps) - area(-eps)) / (2 * eps)
    assert dA == pytest.approx(spectral.integrate(H * bump * w), rel=1e-6)


def test_curzon_data_matches_direct_formulas(curzon1):
    c = ProfileCurve.sphere(3.0, 65)
    d = induced_boundary_data(curzon1, c)
    R = 3.0
    nu = -1.0 / R
    lam = -(c.r**2) / (2 * R**4)
    assert np.allclose(d.alpha, np.exp(lam - nu) * R, atol=1e-10)
    assert np.allclose(d.beta, c.r * np.exp(-nu), atol=1e-12)


def test_pole_compatibility_converges(curzon1):
    curve = lambda n: ProfileCurve.from_functions(  # noqa: E731
        lambda t: 2 * np.sin(t), lambda t: 2 * np.cos(t) + 0.3 * np.cos(2 * t), n=n)
    d17 = induced_boundary_data(curzon1, curve(17)).pole_defect()
    d33 = induced_boundary_data(curzon1, curve(33)).pole_defect()
    d65 = induced_boundary_data(curzon1, curve(65)).pole_defect()
    assert d33 <= d17 / 4 and d65 <= max(d33 / 4, 1e-10)


def test_validation_rejects_bad_curves():
    with pytest.raises(InvalidCurve):
        ProfileCurve.sphere(1.0, 65).reflected().validate()
    th = spectral.lobatto_theta(65)
    with pytest.raises(InvalidCurve):  # meridian crosses itself
        ProfileCurve.from_functions(lambda t: np.sin(t) * (1.2 + np.cos(2 * t)),
                                    lambda t: np.cos(t) + np.cos(3 * t))
    with pytest.raises(InvalidCurve):  # off the axis at the poles
        ProfileCurve(th, np.sin(th) + 0.1, np.cos(th)).validate()


def test_boundary_data_on_support_raises(schwarzschild1):
    with pytest.raises(PointOnSupport):
        induced_boundary_data(schwarzschild1, ProfileCurve.sphere(0.5, 33))


def test_csv_round_trips():
    c = pear()
    back = ProfileCurve.from_csv(c.to_csv())
    assert np.array_equal(back.r, c.r) and np.array_equal(back.z, c.z)
    d = flat_boundary_data(c)
    e = BoundaryData.from_csv(d.to_csv())
    assert np.array_equal(e.alpha, d.alpha) and np.array_equal(e.H, d.H)


@given(st.floats(0.2, 5.0), st.floats(-0.25, 0.25), st.floats(0.5, 2.0))
def test_flat_scaling_covariance(s, eps, aspect):
    c = ProfileCurve.from_functions(np.sin, lambda t: aspect * np.cos(t) + eps * np.cos(2 * t))
    d = flat_boundary_data(c)
    ds = flat_boundary_data(c.scaled(s))
    assert np.allclose(ds.alpha, s * d.alpha, rtol=1e-12)
    assert np.allclose(ds.beta, s * d.beta, rtol=1e-12, atol=1e-14)
    assert np.allclose(ds.H, d.H / s, rtol=1e-10)


@given(st.integers(1, 4))
def test_spectral_derivatives_converge(k):
    c = ProfileCurve.from_functions(lambda t: np.sin(t) * (1 + 0.1 * np.cos(k * t)),
                                    lambda t: np.cos(t), n=65)
    exact = np.cos(c.theta) * (1 + 0.1 * np.cos(k * c.theta)) - 0.1 * k * np.sin(c.theta) * np.sin(k * c.theta)
    assert np.max(np.abs(c.r1 - exact)) <= 1e-11
