import math

import pytest
from hypothesis import given, strategies as st

from weyl_forge.axis_measure import AxisMeasure, PointMass
from weyl_forge.errors import PointOnSupport
from weyl_forge.weyl_metric import (SolutionConfig, WeylSolution, adm_mass, cone_angle_defect,
                                    lambda_eval, metric_components)


def schwarzschild_closed_form(m, r, z):
    """(nu, lambda) of the Schwarzschild rod in Weyl coordinates."""
    R1 = math.hypot(r, z - m)
    R2 = math.hypot(r, z + m)
    s = R1 + R2
    nu = 0.5 * math.log((s - 2 * m) / (s + 2 * m))
    lam = 0.5 * math.log((s * s - 4 * m * m) / (4 * R1 * R2))
    return nu, lam


def test_flat_lambda_vanishes(flat):
    assert lambda_eval(flat, (0.7, -1.3)) == 0.0


@pytest.mark.parametrize("m", [0.5, 1.0])
def test_curzon_lambda_closed_form(m):
    sol = WeylSolution.from_measure(AxisMeasure.curzon(m))
    for r, z in [(1.0, 0.0), (0.4, 1.2), (2.5, -0.7)]:
        R2 = r * r + z * z
        assert lambda_eval(sol, (r, z)) == pytest.approx(-m * m * r * r / (2 * R2 * R2), rel=1e-9)


def test_curzon_example_value(curzon1):
    assert lambda_eval(curzon1, (1.0, 0.0)) == pytest.approx(-0.5, abs=1e-10)


def test_schwarzschild_lambda_routes_agree(schwarzschild1):
    top = lambda_eval(schwarzschild1, (1.0, 1.0), route="top")
    bottom = lambda_eval(schwarzschild1, (1.0, 1.0), route="bottom")
    wide = lambda_eval(schwarzschild1, (1.0, 1.0), route="wide")
    assert abs(top - bottom) <= 1e-9 and abs(top - wide) <= 1e-9
    assert top == pytest.approx(schwarzschild_closed_form(1.0, 1.0, 1.0)[1], abs=1e-9)


def test_regular_axis_for_half_density_rod(schwarzschild1):
    assert abs(cone_angle_defect(schwarzschild1, 2.0)) <= 1e-8
    assert cone_angle_defect(WeylSolution.flat(), 0.3) == 0.0


def test_overdense_rod_is_regular_on_the_outer_axis():
    # d lambda vanishes on r = 0, so the axis beyond the rod is regular;
    # the singularity of a density != 1/2 rod sits on the rod itself
    sol = WeylSolution.from_measure(AxisMeasure.uniform_rod(-1.0, 1.0, 0.8))
    assert cone_angle_defect(sol, 1.05) == 0.0
    near = lambda_eval(sol, (1e-6, 0.0))
    half = WeylSolution.from_measure(AxisMeasure.schwarzschild(1.0))
    assert abs(near - lambda_eval(half, (1e-6, 0.0))) > 1.0


def test_strut_between_two_masses():
    m1, m2, d = 0.3, 0.5, 3.0
    sol = WeylSolution.from_measure(AxisMeasure((PointMass(0.0, m1), PointMass(d, m2))))
    top = lambda_eval(sol, (0.0, 1.2), route="top")
    bottom = lambda_eval(sol, (0.0, 1.2), route="bottom")
    assert top == pytest.approx(-4 * m1 * m2 / d**2, rel=1e-8)
    assert abs(top - bottom) <= 1e-9
    assert abs(top) > 1e-3


def test_metric_components_flat(flat):
    assert metric_components(flat, (2.0, 0.0)) == (1.0, 4.0, 1.0, 2.0)


def test_metric_components_curzon(curzon1):
    g_rr, g_pp, u, f = metric_components(curzon1, (1.0, 0.0))
    assert g_rr == pytest.approx(math.e, rel=1e-10)
    assert g_pp == pytest.approx(math.e**2, rel=1e-12)
    assert u == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert f == pytest.approx(math.e, rel=1e-12)


def test_metric_components_schwarzschild(schwarzschild1):
    nu, lam = schwarzschild_closed_form(1.0, 1.5, 0.5)
    g_rr, g_pp, u, f = metric_components(schwarzschild1, (1.5, 0.5))
    assert g_rr == pytest.approx(math.exp(2 * (lam - nu)), rel=1e-9)
    assert g_pp == pytest.approx(math.exp(-2 * nu) * 2.25, rel=1e-12)
    assert u == pytest.approx(math.exp(nu), rel=1e-12)
    assert f == pytest.approx(1.5 / math.exp(nu), rel=1e-12)


def test_adm_mass_examples():
    assert adm_mass(WeylSolution.from_measure(AxisMeasure.curzon(0.7))) == 0.7
    assert adm_mass(WeylSolution.flat()) == 0.0
    assert adm_mass(WeylSolution.from_measure(AxisMeasure.uniform_rod(-2.0, 2.0, 0.5))) == 2.0


def test_on_support_raises(schwarzschild1):
    with pytest.raises(PointOnSupport):
        lambda_eval(schwarzschild1, (0.0, 0.3))
    with pytest.raises(PointOnSupport):
        metric_components(schwarzschild1, (0.0, -0.9))


def test_error_budget_reported(schwarzschild1):
    v = schwarzschild1.lambda_eval(1.0, 1.0, with_budget=True)
    assert 0.0 <= v.error_budget <= 1e-8


def test_config_from_dict():
    cfg = SolutionConfig.from_dict({"r_anchor_factor": 20, "quad_tol": 1e-9})
    assert cfg == SolutionConfig(20.0, 1e-9)


# -- properties ---------------------------------------------------------------

two_masses = st.tuples(st.floats(0.1, 1.0), st.floats(0.1, 1.0), st.floats(-1.0, 1.0)).map(
    lambda p: AxisMeasure((PointMass(-0.5, p[0]), PointMass(0.5, p[1]))) + AxisMeasure.uniform_rod(-0.3, 0.3, p[2])
)
points = st.tuples(st.floats(0.3, 2.5), st.floats(-2.5, 2.5))


def _d4(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


@given(two_masses, points)
def test_closedness_of_dlambda(m, pt):
    sol = WeylSolution.from_measure(m)
    r, z = pt
    h = 1e-3
    dz_lam_r = _d4(lambda zz: sol.lambda_gradient(r, zz)[0], z, h)
    dr_lam_z = _d4(lambda rr: sol.lambda_gradient(rr, z)[1], r, h)
    scale = 1.0 + abs(dz_lam_r) + abs(dr_lam_z)
    assert abs(dz_lam_r - dr_lam_z) <= 1e-8 * scale


@given(two_masses, points)
def test_path_independence(m, pt):
    sol = WeylSolution.from_measure(m)
    a = lambda_eval(sol, pt, route="top")
    b = lambda_eval(sol, pt, route="bottom")
    assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


@given(st.floats(0.1, 1.0), st.floats(0.1, 1.0), points)
def test_reflection_symmetry(m0, m1, pt):
    meas = AxisMeasure((PointMass(-0.6, m1), PointMass(0.6, m1))) + AxisMeasure.schwarzschild(m0 * 0.5)
    sol = WeylSolution.from_measure(meas)
    r, z = pt
    assert lambda_eval(sol, (r, z)) == pytest.approx(lambda_eval(sol, (r, -z)), abs=1e-9)


@given(two_masses, points)
def test_positivity(m, pt):
    _, _, u, f = metric_components(WeylSolution.from_measure(m), pt)
    assert u > 0.0 and f > 0.0
