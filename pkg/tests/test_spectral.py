import numpy as np
import pytest
from hypothesis import given, strategies as st

from weyl_forge import spectral


def test_lobatto_grid():
    th = spectral.lobatto_theta(5)
    assert np.allclose(th, 0.5 * np.pi * (1 - np.cos(np.pi * np.arange(5) / 4)))
    assert th[0] == 0.0 and th[-1] == np.pi


def test_derivative_of_trig_polynomial():
    th = spectral.lobatto_theta(33)
    f = np.cos(3 * th) + np.sin(th) ** 2
    assert np.max(np.abs(spectral.deriv(f) - (-3 * np.sin(3 * th) + np.sin(2 * th)))) <= 1e-12
    assert np.max(np.abs(spectral.deriv(f, 2) - (-9 * np.cos(3 * th) + 2 * np.cos(2 * th)))) <= 1e-10


def test_filtered_beats_raw_matrix_for_second_derivative():
    th = spectral.lobatto_theta(65)
    f = np.exp(np.cos(th))
    exact = np.exp(np.cos(th)) * (np.sin(th) ** 2 - np.cos(th))
    e_f = np.max(np.abs(spectral.deriv(f, 2) - exact))
    e_r = np.max(np.abs(spectral.deriv(f, 2, filtered=False) - exact))
    assert e_f <= e_r and e_f <= 1e-9


def test_integration_and_cumulative():
    th = spectral.lobatto_theta(33)
    assert spectral.integrate(np.sin(th)) == pytest.approx(2.0, abs=1e-14)
    cum = spectral.cumulative_integral(np.sin(th))
    assert np.max(np.abs(cum - (1 - np.cos(th)))) <= 1e-13


def test_interpolation():
    th = spectral.lobatto_theta(33)
    t = np.array([0.1, 1.0, 2.9])
    assert np.allclose(spectral.interpolate(np.cos(2 * th), t), np.cos(2 * t), atol=1e-13)


@given(st.integers(0, 12), st.integers(0, 12))
def test_trig_products_integrate_exactly(j, k):
    th = spectral.lobatto_theta(65)
    exact = 0.0 if j != k else (np.pi if j == 0 else np.pi / 2)
    assert spectral.integrate(np.cos(j * th) * np.cos(k * th)) == pytest.approx(exact, abs=1e-12)
