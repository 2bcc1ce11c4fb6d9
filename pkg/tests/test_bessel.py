from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from awbridge.bessel import (BesselDomainError, BesselOrder, ZeroTable, bessel_j,
                             bessel_j_derivative, bessel_j_small_x_limit_checks, bessel_zeros,
                             cached_zeros, euler_product, lommel_integral, mcmahon_guess)

orders = st.floats(min_value=-0.99, max_value=8.0, allow_nan=False)
args = st.floats(min_value=1e-6, max_value=400.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(orders, args)
def test_matches_scipy_jv(nu, x):
    ours = bessel_j(nu, x)
    ref = special.jv(nu, x)
    # absolute error scaled by the envelope max(1, sqrt(2/(pi x))) * max(1, |J|)
    scale = max(1.0, math.sqrt(2.0 / (math.pi * x)), abs(ref))
    assert abs(ours - ref) <= 5e-13 * scale


@pytest.mark.parametrize("nu,x", [(0.3, 17.5), (2.7, 16.01), (5.5, 40.0), (0.0, 250.0),
                                  (-0.7, 3.0), (7.9, 9.0)])
def test_matches_mpmath(nu, x):
    ref = float(mpmath.besselj(nu, x))
    assert bessel_j(nu, x) == pytest.approx(ref, abs=2e-14)


def test_half_order_closed_forms():
    x = np.linspace(0.01, 80.0, 2001)
    env = np.sqrt(2.0 / (np.pi * x))
    np.testing.assert_allclose(bessel_j(0.5, x), env * np.sin(x), atol=1e-12 * env.max())
    np.testing.assert_allclose(bessel_j(-0.5, x), env * np.cos(x), rtol=0, atol=1e-12 * env.max())


def test_scalar_in_float_out():
    assert isinstance(bessel_j(1.0, 2.0), float)
    assert bessel_j(1.0, np.array([2.0, 3.0])).shape == (2,)


@pytest.mark.parametrize("nu", [-1.0, -2.5, float("nan")])
def test_rejects_order_at_or_below_minus_one(nu):
    with pytest.raises(BesselDomainError):
        bessel_j(nu, 1.0)
    with pytest.raises(BesselDomainError):
        BesselOrder(nu)


@pytest.mark.parametrize("x", [0.0, -1.0, float("inf")])
def test_rejects_bad_argument(x):
    with pytest.raises(BesselDomainError):
        bessel_j(0.5, x)


def test_derivative_against_scipy():
    x = np.linspace(0.5, 40.0, 50)
    for nu in (0.0, 0.7, 2.0):
        np.testing.assert_allclose(bessel_j_derivative(nu, x), special.jvp(nu, x), atol=1e-13)


@pytest.mark.parametrize("nu", [-0.25, 0.0, 0.5, 1.0, 2.5])
def test_small_x_limits(nu):
    rep = bessel_j_small_x_limit_checks(BesselOrder(nu))
    assert rep.passed, rep.format()


def test_small_x_minus_quarter_decays_slowly():
    # sqrt(x) J_{-1/4}(x) ~ x^{1/4}: at x = 1e-8 it is still about 1e-2
    g = math.sqrt(1e-8) * bessel_j(-0.25, 1e-8)
    assert 5e-3 < g < 2e-2


@pytest.mark.parametrize("n", [0, 1, 2, 5])
def test_integer_zeros_match_scipy(n):
    z = bessel_zeros(n, 500).zeros
    np.testing.assert_allclose(z, special.jn_zeros(n, 500), rtol=0, atol=1e-11)


@pytest.mark.parametrize("nu", [0.3, 1.7, 3.25])
def test_fractional_zeros_match_mpmath(nu):
    z = bessel_zeros(nu, 12)
    for k in (1, 2, 7, 12):
        assert z[k] == pytest.approx(float(mpmath.besseljzero(nu, k)), abs=1e-12)


@pytest.mark.parametrize("nu", [-0.9, -0.6, -0.4])
def test_negative_order_zeros_are_roots(nu):
    z = bessel_zeros(nu, 40).zeros
    assert np.all(np.abs(special.jv(nu, z)) < 1e-12)
    # no zero is skipped: sign of J alternates between consecutive zeros
    mid = 0.5 * (z[:-1] + z[1:])
    s = np.sign(special.jv(nu, mid))
    assert np.all(s[:-1] * s[1:] < 0)
    assert special.jv(nu, 0.5 * z[0]) > 0


def test_half_order_zeros_are_multiples_of_pi():
    z = bessel_zeros(0.5, 1000).zeros
    np.testing.assert_allclose(z, np.pi * np.arange(1, 1001), rtol=1e-13)
    z = bessel_zeros(-0.5, 100).zeros
    np.testing.assert_allclose(z, np.pi * (np.arange(1, 101) - 0.5), rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-0.95, max_value=6.0), st.floats(min_value=0.05, max_value=1.0))
def test_zeros_increase_with_order(nu, dnu):
    a = bessel_zeros(nu, 25).zeros
    b = bessel_zeros(nu + dnu, 25).zeros
    assert np.all(b > a)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-0.95, max_value=6.0))
def test_zeros_interlace(nu):
    a = bessel_zeros(nu, 30).zeros
    b = bessel_zeros(nu + 1.0, 30).zeros
    assert np.all(a < b)
    assert np.all(b[:-1] < a[1:])


def test_mcmahon_asymptotics():
    for nu in (0.0, 1.0, 3.0):
        z = bessel_zeros(nu, 300).zeros
        k = np.arange(1, 301)
        err = np.abs(z - mcmahon_guess(nu, k))
        assert err[-1] < 1e-9
        assert err[99] < 1e-6


def test_zero_table_indexing_and_extend():
    t = bessel_zeros(1.0, 5)
    assert isinstance(t, ZeroTable)
    assert len(t) == 5 and t[1] == t.zeros[0]
    with pytest.raises(IndexError):
        t[0]
    with pytest.raises(IndexError):
        t[6]
    longer = t.extend(50)
    np.testing.assert_array_equal(longer.zeros[:5], t.zeros)
    np.testing.assert_allclose(longer.zeros, bessel_zeros(1.0, 50).zeros, rtol=0, atol=1e-13)
    with pytest.raises(ValueError):
        t.zeros[0] = 1.0


@pytest.mark.parametrize("tol", [1e-16, 1e-3])
def test_zero_tolerance_bounds(tol):
    with pytest.raises(ValueError):
        bessel_zeros(0.0, 3, abs_tol=tol)


def test_cached_zeros_grow():
    a = cached_zeros(0.123, 10)
    b = cached_zeros(0.123, 20)
    assert len(b) >= 20
    np.testing.assert_array_equal(b.zeros[:10], a.zeros)


@pytest.mark.parametrize("nu", [-0.4, 0.0, 0.5, 2.0])
@pytest.mark.parametrize("k", [1, 2, 5])
def test_lommel_integral(nu, k):
    quad, closed = lommel_integral(nu, k)
    assert quad == pytest.approx(closed, abs=1e-9)


def test_euler_product_converges():
    x = np.linspace(0.2, 5.0, 25)
    for nu in (0.0, 0.5, 1.0):
        zeros = cached_zeros(nu, 10_000)
        err = np.abs(euler_product(nu, x, 10_000, zeros) - special.jv(nu, x))
        assert err.max() < 1e-4
        coarse = np.abs(euler_product(nu, x, 100, zeros) - special.jv(nu, x))
        assert coarse.max() > err.max()
