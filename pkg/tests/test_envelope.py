"""The compiled spline kernel against scipy's natural cubic spline."""

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from mdkit import _envelope


@pytest.mark.parametrize("seed", range(5))
def test_spline_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    M = 400
    knots = np.sort(rng.choice(np.arange(-6, M + 6), size=25, replace=False)).astype(float)
    values = rng.standard_normal(25) + 1j * rng.standard_normal(25)
    out = np.zeros(M, complex)
    _envelope._spline_accumulate(knots, values, out)
    expected = CubicSpline(knots, values, bc_type="natural")(np.arange(M))
    np.testing.assert_allclose(out, expected, atol=1e-9)


def test_two_knot_spline_is_a_line():
    out = np.zeros(11)
    _envelope._spline_accumulate(np.array([0.0, 10.0]), np.array([1.0, 3.0]), out)
    np.testing.assert_allclose(out, 1.0 + 0.2 * np.arange(11))


def test_spline_accumulates():
    out = np.ones(5)
    _envelope._spline_accumulate(np.array([-1.0, 5.0]), np.array([0.0, 0.0]), out)
    np.testing.assert_array_equal(out, np.ones(5))


def test_mirrored_knots():
    values = np.arange(20.0)
    idx = np.array([3, 8, 14], dtype=np.int64)
    xk, yk = _envelope._mirrored_knots(idx, 3, values, 20)
    np.testing.assert_array_equal(xk, [-8, -3, 3, 8, 14, 24, 30])
    np.testing.assert_array_equal(yk, [8, 3, 3, 8, 14, 14, 8])


def test_real_envelope_mean_of_sine_is_near_zero():
    x = np.sin(2 * np.pi * np.arange(2000) / 50)
    mean, ok = _envelope.real_envelope_mean(x, 2)
    assert ok
    assert np.max(np.abs(mean[100:-100])) < 1e-3


def test_count_extrema():
    x = np.array([0.0, 1.0, -1.0, 2.0, -2.0, 0.5])
    assert _envelope.count_extrema(x) == (2, 2, 4)
