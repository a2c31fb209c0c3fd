import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from composite_fading.special import (
    BesselMethod,
    DomainError,
    bessel_i,
    bessel_ive,
    bessel_k,
    bessel_ke,
    gross_weights,
    ln_gamma,
    log_bessel_i,
    log_bessel_k,
    log_incomplete_gamma_integral,
)

mp.mp.dps = 30


def test_ln_gamma_examples():
    assert ln_gamma(1.0) == 0.0
    assert ln_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-13)
    assert ln_gamma(6.0) == pytest.approx(math.log(120.0), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_ln_gamma_domain(x):
    with pytest.raises(DomainError):
        ln_gamma(x)


def test_bessel_i_examples():
    assert bessel_i(0.0, 0.0) == 1.0
    assert bessel_i(0.5, 1.0) == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-14)
    # 30-digit reference from mpmath
    assert bessel_i(1.0, 2.0) == pytest.approx(1.5906368546373291, rel=1e-14)


def test_bessel_i_rejects_order_below_minus_half():
    with pytest.raises(DomainError):
        bessel_i(-0.6, 1.0)
    with pytest.raises(DomainError):
        bessel_i(1.0, -1.0)


def test_bessel_i_matches_mpmath_up_to_30():
    worst = 0.0
    for nu in (-0.5, -0.2, 0.0, 0.3, 1.0, 2.5, 7.0, 19.5):
        for x in (1e-3, 0.1, 1.0, 4.0, 12.0, 29.0):
            ref = float(mp.besseli(nu, x))
            worst = max(worst, abs(bessel_i(nu, x) - ref) / ref)
    assert worst < 1e-12


def test_bessel_i_large_argument_via_log():
    for nu, x in ((0.0, 200.0), (3.5, 800.0), (1.0, 5000.0)):
        ref = float(mp.log(mp.besseli(nu, x)))
        assert log_bessel_i(nu, x) == pytest.approx(ref, rel=1e-13)
        assert bessel_ive(nu, x) == pytest.approx(float(mp.besseli(nu, x) * mp.e ** (-x)), rel=1e-12)


def test_bessel_k_examples():
    assert bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1.0), rel=1e-14)
    assert bessel_k(-0.5, 1.0) == bessel_k(0.5, 1.0)
    # integral representation evaluated by mpmath: 0.06151045847174204
    assert bessel_k(2.0, 3.0) == pytest.approx(0.061510458471742038, rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -2.0])
def test_bessel_k_domain(x):
    with pytest.raises(DomainError):
        bessel_k(1.0, x)


def test_bessel_k_matches_mpmath_on_contract_range():
    worst = 0.0
    for nu in (0.0, 0.25, 0.5, 1.0, 1.0 + 1e-7, 2.0 - 1e-9, 3.3, 7.0, 12.5, 20.0, -4.2):
        for x in (1e-3, 0.01, 0.5, 1.9, 2.1, 8.0, 25.0, 50.0):
            ref = float(mp.besselk(nu, x))
            worst = max(worst, abs(bessel_k(nu, x) - ref) / ref)
    assert worst < 1e-10


def test_bessel_k_scaled_and_log_forms():
    assert bessel_ke(1.5, 700.0) == pytest.approx(float(mp.besselk(1.5, 700) * mp.e**700), rel=1e-12)
    assert log_bessel_k(30.0, 1e-3) == pytest.approx(float(mp.log(mp.besselk(30, mp.mpf("1e-3")))), rel=1e-13)


def test_half_order_closed_forms():
    x = np.array([1e-3, 0.1, 1.0, 5.0, 20.0, 50.0])
    np.testing.assert_allclose(bessel_k(0.5, x), np.sqrt(np.pi / (2 * x)) * np.exp(-x), rtol=1e-12)
    xi = x[x <= 30]
    np.testing.assert_allclose(bessel_i(0.5, xi), np.sqrt(2 / (np.pi * xi)) * np.sinh(xi), rtol=1e-12)
    np.testing.assert_allclose(bessel_i(-0.5, xi), np.sqrt(2 / (np.pi * xi)) * np.cosh(xi), rtol=1e-12)


def test_gross_polynomial_term_count_and_convergence():
    w = gross_weights(3)
    # 1, 1, (1 - 1/9), (1 - 1/9)(1 - 4/9)
    np.testing.assert_allclose(w, [1.0, 1.0, 8 / 9, 8 / 9 * 5 / 9])
    x = np.linspace(0.05, 5.0, 60)
    errs = []
    for n in (10, 30):
        errs.append(max(np.max(np.abs(bessel_i(nu, x, BesselMethod.gross(n)) / bessel_i(nu, x) - 1)) for nu in (0.5, 1, 2)))
    assert errs[1] < errs[0]


def test_bessel_method_validation():
    with pytest.raises(ValueError):
        BesselMethod(kind="exact_series", tol=0.0)
    with pytest.raises(ValueError):
        BesselMethod.gross(-1)


def test_incomplete_gamma_integral_closed_form():
    # int y^(p-1) exp(-a/y - g y) dy
    for p, a, g in ((2.5, 4.0, 1.0), (-1.3, 0.7, 2.0), (0.5, 1.0, 1.0)):
        ref = mp.quad(lambda y: y ** (p - 1) * mp.e ** (-a / y - g * y), [0, 1, 10, mp.inf])
        assert math.exp(log_incomplete_gamma_integral(p, a, g)) == pytest.approx(float(ref), rel=1e-12)
    # a = 0 reduces to Gamma(p) / g^p
    assert math.exp(log_incomplete_gamma_integral(1.7, 0.0, 2.0)) == pytest.approx(math.gamma(1.7) / 2**1.7)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(0.0, 15.0), x=st.floats(1e-2, 45.0))
def test_wronskian_property(nu, x):
    lhs = math.exp(log_bessel_i(nu, x) + log_bessel_k(nu + 1, x)) + math.exp(log_bessel_i(nu + 1, x) + log_bessel_k(nu, x))
    assert lhs == pytest.approx(1.0 / x, rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(-10.0, 10.0), x=st.floats(1e-3, 40.0), dx=st.floats(1e-3, 5.0))
def test_k_positive_decreasing_and_even_in_order(nu, x, dx):
    assert 0 < bessel_k(nu, x + dx) < bessel_k(nu, x)
    assert bessel_k(-nu, x) == pytest.approx(bessel_k(nu, x), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(0.0, 10.0), x=st.floats(1e-3, 40.0), dx=st.floats(1e-3, 5.0))
def test_i_positive_increasing(nu, x, dx):
    assert 0 < bessel_i(nu, x) < bessel_i(nu, x + dx)
