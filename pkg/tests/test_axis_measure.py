import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from weyl_forge.axis_measure import (AxisMeasure, PointMass, Rod, potential_derivatives,
                                     potential_eval, total_mass)
from weyl_forge.errors import InvalidMeasure, PointOnSupport

# frozen oracle: -(1/2) int_{-1}^{1} dt / sqrt(1 + t^2) = -asinh(1)
ROD_HALF_AT_1_0 = -0.881373587019543


def test_total_mass_examples():
    assert total_mass(AxisMeasure.schwarzschild(1.0)) == pytest.approx(1.0, abs=1e-15)
    assert total_mass(AxisMeasure.empty()) == 0.0
    assert total_mass(AxisMeasure.uniform_rod(-2.0, 2.0, 0.3)) == pytest.approx(1.2, abs=1e-14)


def test_total_mass_polynomial_density_matches_quadrature():
    rod = Rod(-1.0, 2.0, (0.3, 0.1, -0.05, 0.02))
    m = AxisMeasure((rod, PointMass(3.0, -0.4)))
    oracle = integrate.quad(lambda z: 0.3 + 0.1 * z - 0.05 * z**2 + 0.02 * z**3, -1.0, 2.0)[0] - 0.4
    assert total_mass(m) == pytest.approx(oracle, abs=1e-13)


def test_curzon_potential():
    assert potential_eval(AxisMeasure.curzon(1.0), 0.3, 0.4) == pytest.approx(-2.0, abs=1e-14)


def test_empty_measure_is_zero():
    assert potential_eval(AxisMeasure.empty(), 0.7, -0.2) == 0.0
    assert np.all(potential_derivatives(AxisMeasure.empty(), 0.7, -0.2) == 0.0)


def test_rod_potential_against_trapezoid_oracle():
    t = np.linspace(-1.0, 1.0, 400001)
    trap = -0.5 * integrate.trapezoid(1.0 / np.hypot(1.0, t), t)
    val = potential_eval(AxisMeasure.schwarzschild(1.0), 1.0, 0.0)
    assert abs(val - trap) <= 1e-10
    assert abs(val - ROD_HALF_AT_1_0) <= 1e-14


def test_curzon_gradient_on_axis():
    j = potential_derivatives(AxisMeasure.curzon(1.0), 0.0, 1.0)
    assert j[2] == pytest.approx(1.0, abs=1e-14)
    assert j[1] == 0.0


def test_rod_derivatives_against_finite_differences():
    m = AxisMeasure((Rod(-1.0, 2.0, (0.3, 0.1, -0.05, 0.02)),))
    r, z, h = 0.5, 0.7, 1e-5
    j = potential_derivatives(m, r, z)
    f = lambda rr, zz: potential_eval(m, rr, zz)
    d_r = (f(r + h, z) - f(r - h, z)) / (2 * h)
    d_z = (f(r, z + h) - f(r, z - h)) / (2 * h)
    d_rr = (f(r + h, z) - 2 * f(r, z) + f(r - h, z)) / h**2
    assert abs(j[1] - d_r) <= 1e-6
    assert abs(j[2] - d_z) <= 1e-6
    assert abs(j[3] - d_rr) <= 1e-4  # second differences lose half the digits


def test_closed_form_matches_adaptive_quadrature():
    m = AxisMeasure((Rod(-1.0, 2.0, (0.3, 0.1, -0.05, 0.02)), PointMass(-2.0, 0.5)))
    for r, z in [(0.5, 0.7), (0.05, 0.3), (2.0, -3.0), (1e-3, 2.5)]:
        a = potential_derivatives(m, r, z)
        b = potential_derivatives(m, r, z, method="quadrature")
        assert np.allclose(a, b, rtol=1e-9, atol=1e-9)


def test_point_on_support_raises():
    with pytest.raises(PointOnSupport):
        potential_eval(AxisMeasure.schwarzschild(1.0), 0.0, 0.5)
    with pytest.raises(PointOnSupport):
        potential_eval(AxisMeasure.curzon(1.0, z0=0.2), 0.0, 0.2)


def test_invalid_rods_rejected():
    with pytest.raises(InvalidMeasure):
        Rod(1.0, 1.0, (0.5,))
    with pytest.raises(InvalidMeasure):
        Rod(0.0, 1.0, (1.0, 0.0, 0.0, 0.0, 1.0))
    with pytest.raises(InvalidMeasure):
        Rod(0.0, math.inf, (1.0,))


def test_json_round_trip():
    m = AxisMeasure((Rod(-1.0, 1.0, (0.5, 0.1)), PointMass(2.0, 0.3)))
    back = AxisMeasure.from_json(m.to_json())
    assert back == m


# -- properties ---------------------------------------------------------------

measures = st.lists(
    st.one_of(
        st.builds(lambda z0, m: PointMass(z0, m),
                  st.floats(-1.0, 1.0), st.floats(-2.0, 2.0)),
        st.builds(lambda a, L, c0, c1: Rod(a, a + L, (c0, c1)),
                  st.floats(-1.0, 0.5), st.floats(0.1, 1.0),
                  st.floats(-1.0, 1.0), st.floats(-0.5, 0.5)),
    ),
    min_size=1, max_size=4,
).map(lambda comps: AxisMeasure(tuple(comps)))

off_axis_points = st.tuples(st.floats(0.05, 3.0), st.floats(-3.0, 3.0))


@given(measures, off_axis_points)
def test_harmonicity(m, pt):
    r, z = pt
    nu, nu_r, nu_z, nu_rr, nu_rz, nu_zz = potential_derivatives(m, r, z)
    scale = 1.0 + abs(nu_rr) + abs(nu_zz) + abs(nu_r / r)
    assert abs(nu_rr + nu_r / r + nu_zz) <= 1e-9 * scale


@given(measures, measures, off_axis_points)
def test_superposition(m1, m2, pt):
    both = potential_derivatives(m1 + m2, *pt)
    assert np.allclose(both, potential_derivatives(m1, *pt) + potential_derivatives(m2, *pt),
                       rtol=1e-13, atol=1e-13)


@given(st.floats(0.1, 2.0), st.floats(-1.0, 1.0), off_axis_points)
def test_even_symmetry(half, c2, pt):
    m = AxisMeasure((Rod(-half, half, (1.0, 0.0, c2)), PointMass(half + 0.5, 0.3), PointMass(-half - 0.5, 0.3)))
    r, z = pt
    assert potential_eval(m, r, z) == pytest.approx(potential_eval(m, r, -z), rel=1e-12, abs=1e-14)


def _gross(c):
    """Total variation of a component: sum of |mass| over its pieces."""
    if isinstance(c, PointMass):
        return abs(c.mass)
    return integrate.quad(lambda z: abs(np.polynomial.polynomial.polyval(z, c.density)), c.z_lo, c.z_hi)[0]


@given(measures, st.floats(0.0, math.pi))
def test_decay(m, angle):
    # multipole expansion about the centre of the support: the remainder
    # after the monopole is at most (total variation) * half / R
    lo, hi = m.support_interval()
    centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    R = 1e3 * max(half, 1.0)
    mass = total_mass(m)
    val = potential_eval(m, R * math.sin(angle), centre + R * math.cos(angle)) * R
    gross = sum(_gross(c) for c in m.components)
    assert abs(val + mass) <= 1e-3 * abs(mass) + 1.01 * gross * half / R
