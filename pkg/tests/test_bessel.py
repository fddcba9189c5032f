import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jv

from gl2dist.bessel import asymptotic_limit, bessel_j, series_limit


def test_examples():
    assert bessel_j(11, 0.0) == 0
    assert bessel_j(0, 0.0) == 1
    assert abs(bessel_j(1, 1.0) - 0.4400505857449335) < 1e-14


@pytest.mark.parametrize("order", [0, 1, 2, 5, 11, 20, 40, 64])
def test_against_scipy_all_regimes(order):
    x = np.concatenate([np.linspace(0, 30, 3001), np.geomspace(30, 5e4, 3000)])
    assert np.max(np.abs(bessel_j(order, x) - jv(order, x))) < 1e-12


@pytest.mark.parametrize("order", [11, 64])
def test_against_mpmath_near_switch_points(order):
    pts = [series_limit(order), asymptotic_limit(order)]
    for p in pts:
        for x in (p * 0.999, p, p * 1.001):
            ref = float(mpmath.besselj(order, x))
            assert abs(bessel_j(order, x) - ref) < 1e-12


@given(st.integers(1, 12), st.floats(1.0, 100.0))
@settings(max_examples=200, deadline=None)
def test_three_term_recurrence(n, x):
    lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x)
    rhs = 2 * n / x * bessel_j(n, x)
    assert abs(lhs - rhs) < 1e-8


def test_shape_and_validation():
    x = np.linspace(0, 10, 12).reshape(3, 4)
    assert bessel_j(3, x).shape == (3, 4)
    assert isinstance(bessel_j(3, 2.0), float)
    with pytest.raises(ValueError):
        bessel_j(65, 1.0)
    with pytest.raises(ValueError):
        bessel_j(2, -1.0)
