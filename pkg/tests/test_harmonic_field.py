import numpy as np
import pytest
from hypothesis import given, strategies as st

from weyl_forge.axis_measure import AxisMeasure, potential_eval
from weyl_forge.errors import InvalidCurve, PointOnSupport
from weyl_forge.harmonic_field import (FitConfig, HarmonicField, axis_source_positions,
                                       field_eval, solve_exterior_dirichlet)
from weyl_forge.profile_geometry import ProfileCurve


def _exterior_probes(curve, k=20, seed=1):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0.0, np.pi, k)
    s = rng.uniform(1.1, 3.0, k)
    r, z = curve.point_at(th)
    return np.abs(r) * s, z * s


def test_constant_data_on_sphere():
    c = ProfileCurve.sphere(1.0, 65)
    fit = solve_exterior_dirichlet(c, lambda t: np.full_like(t, -0.5))
    assert fit.boundary_residual_sup <= 1e-8
    assert fit.field.decay_mass == pytest.approx(0.5, abs=1e-8)
    r, z = _exterior_probes(c)
    assert np.allclose(fit.field.jet(r, z)[0], -0.5 / np.hypot(r, z), atol=1e-8)


def test_zero_data_gives_zero_field():
    fit = solve_exterior_dirichlet(ProfileCurve.sphere(2.0, 65), lambda t: np.zeros_like(t))
    assert np.all(fit.field.sources[1] == 0.0)
    assert fit.boundary_residual_sup == 0.0


def test_curzon_trace_on_ellipsoid():
    ell = ProfileCurve.from_functions(lambda t: 1.2 * np.sin(t), lambda t: 0.8 * np.cos(t))
    m = AxisMeasure.curzon(1.0)
    fit = solve_exterior_dirichlet(ell, lambda t: potential_eval(m, *np.abs(ell.point_at(t))))
    r, z = _exterior_probes(ell)
    assert np.max(np.abs(fit.field.jet(r, z)[0] - potential_eval(m, r, z))) <= 1e-6


def test_nodal_boundary_values_accepted():
    c = ProfileCurve.sphere(1.0, 65)
    fit = solve_exterior_dirichlet(c, np.full(65, 0.25))
    assert fit.boundary_residual_sup <= 1e-8
    with pytest.raises(ValueError):
        solve_exterior_dirichlet(c, np.ones(10))


def test_residual_ordering():
    c = ProfileCurve.from_functions(np.sin, lambda t: np.cos(t) + 0.2 * np.cos(2 * t))
    fit = solve_exterior_dirichlet(c, lambda t: np.cos(t) ** 3, FitConfig(n_sources=12))
    assert fit.boundary_residual_sup >= fit.boundary_residual_l2 >= 0.0


def test_uniqueness_surrogate():
    # prolate: the harmonic continuation of this data is singular on the axis only
    c = ProfileCurve.from_functions(lambda t: 0.8 * np.sin(t), lambda t: 1.2 * np.cos(t))
    g = lambda t: 0.3 * np.cos(t) - 0.2 * np.cos(t) ** 2  # noqa: E731
    a = solve_exterior_dirichlet(c, g, FitConfig(n_sources=24))
    b = solve_exterior_dirichlet(c, g, FitConfig(n_sources=40))
    r, z = _exterior_probes(c)
    gap = np.max(np.abs(a.field.jet(r, z)[0] - b.field.jet(r, z)[0]))
    assert gap <= 10.0 * (a.boundary_residual_sup + b.boundary_residual_sup) + 1e-12


def test_sources_inside_the_curve():
    c = ProfileCurve.from_functions(lambda t: 0.5 * np.sin(t), lambda t: 2 * np.cos(t) + 0.3)
    for layout in ("uniform", "chebyshev"):
        zs = axis_source_positions(c, 17, 0.15, layout)
        assert np.all(zs > c.z[-1]) and np.all(zs < c.z[0])
        assert zs.min() == pytest.approx(c.z[-1] + 0.15 * 4.0)
        assert zs.max() == pytest.approx(c.z[0] - 0.15 * 4.0)
    with pytest.raises(InvalidCurve):
        axis_source_positions(c.reflected(), 5, 0.15)


def test_single_source_arithmetic():
    # nu = sum c_i / |x - y_i|, so a strength of -1 at distance 0.5 gives -2
    f = HarmonicField.from_sources([0.0], [-1.0])
    nu, grad, hess = field_eval(f, (0.3, 0.4))
    assert nu == pytest.approx(-2.0, abs=1e-14)
    assert f.decay_mass == 1.0
    assert np.trace(hess) + grad[0] / 0.3 == pytest.approx(0.0, abs=1e-12)


def test_empty_expansion():
    nu, grad, hess = field_eval(HarmonicField.from_sources([], []), (0.3, 0.4))
    assert nu == 0.0 and np.all(grad == 0.0) and np.all(hess == 0.0)


def test_source_on_evaluation_point():
    with pytest.raises(PointOnSupport):
        HarmonicField.from_sources([0.5], [1.0]).jet(0.0, 0.5)


def test_json_round_trip():
    f = HarmonicField.from_sources([0.1, -0.2], [0.3, 0.4])
    g = HarmonicField.from_dict(f.to_dict())
    assert np.array_equal(g.sources[0], f.sources[0]) and np.array_equal(g.sources[1], f.sources[1])
    h = HarmonicField.from_measure(AxisMeasure.schwarzschild(1.0))
    assert HarmonicField.from_dict(h.to_dict()).measure == h.measure


@given(st.lists(st.tuples(st.floats(-1.0, 1.0), st.floats(-2.0, 2.0)), min_size=1, max_size=6),
       st.floats(0.05, 2.0), st.floats(-2.0, 2.0))
def test_superposition_and_monopole(pairs, r, z):
    zs = np.array([p[0] for p in pairs])
    cs = np.array([p[1] for p in pairs])
    f = HarmonicField.from_sources(zs, cs)
    single = sum(HarmonicField.from_sources([zi], [ci]).jet(r, z) for zi, ci in zip(zs, cs))
    assert f.decay_mass == sum(-c for c in cs)
    assert np.allclose(f.jet(r, z), single, rtol=1e-12, atol=1e-12)


@given(st.floats(-1.0, 1.0), st.floats(0.05, 2.0), st.floats(-2.0, 2.0))
def test_exact_harmonicity(z0, r, z):
    _, nu_r, _, nu_rr, _, nu_zz = HarmonicField.from_sources([z0, z0 + 0.3], [1.0, -0.4]).jet(r, z)
    assert abs(nu_rr + nu_r / r + nu_zz) <= 1e-10 * (1 + abs(nu_rr) + abs(nu_zz))
