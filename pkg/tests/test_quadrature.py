import math

import numpy as np
import pytest

from composite_fading.quadrature import (
    ENV_TOL,
    QuadConfig,
    QuadratureError,
    integrate_interval,
    integrate_interval_batch,
    integrate_semi_infinite,
    integrate_semi_infinite_batch,
    require,
)
from composite_fading.special import bessel_k


@pytest.mark.parametrize("transform", ["double_exponential", "rational"])
def test_exponential(transform):
    res = integrate_semi_infinite(lambda y: np.exp(-y), QuadConfig(transform=transform))
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("transform", ["double_exponential", "rational"])
def test_integrable_endpoint_singularity(transform):
    # int y^-1/2 e^-y = sqrt(pi)
    res = integrate_semi_infinite(lambda y: np.exp(-y) / np.sqrt(y), QuadConfig(transform=transform))
    assert res.value == pytest.approx(math.sqrt(math.pi), rel=1e-9)


def test_bessel_k_integral_representation():
    # K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt
    for nu in (0.0, 1.5, 4.0):
        for z in (0.3, 2.0, 9.0):
            with np.errstate(over="ignore"):
                res = integrate_semi_infinite(
                    lambda t: 0.5 * (np.exp(nu * t - z * np.cosh(t)) + np.exp(-nu * t - z * np.cosh(t)))
                )
            assert res.value == pytest.approx(bessel_k(nu, z), rel=1e-10)


def test_interval_and_empty_interval():
    res = integrate_interval(np.sin, 0.0, math.pi)
    assert res.value == pytest.approx(2.0, rel=1e-12)
    assert integrate_interval(np.sin, 1.0, 1.0).value == 0.0


def test_batch_shapes():
    k = np.array([1.0, 2.0, 3.0])
    r = integrate_semi_infinite_batch(lambda y: np.exp(-k[:, None] * y[None, :]))
    np.testing.assert_allclose(r.value, 1.0 / k, rtol=1e-12)
    r = integrate_interval_batch(lambda u: np.vstack([u, u * u]), 0.0, 1.0)
    np.testing.assert_allclose(r.value, [0.5, 1.0 / 3.0], rtol=1e-12)


def test_budget_limits_and_require():
    f = lambda y: np.exp(-y) * np.cos(40 * y) ** 2
    tight = integrate_semi_infinite(f, QuadConfig(rel_tol=1e-14, max_refinements=1))
    assert not tight.converged
    assert tight.refinements_used <= 1
    with pytest.raises(QuadratureError, match="did not converge"):
        require(tight, "oscillatory test")
    loose = integrate_semi_infinite(f, QuadConfig(max_refinements=20))
    # the error estimate does not grow as the budget increases
    assert loose.err_estimate <= tight.err_estimate


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureError):
        integrate_interval(lambda u: np.where(u > 0.5, np.nan, u), 0.0, 1.0)


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0.0), dict(abs_tol=-1.0), dict(max_refinements=0), dict(transform="x")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        QuadConfig(**kwargs)


def test_env_override(monkeypatch):
    monkeypatch.setenv(ENV_TOL, "1e-6")
    assert QuadConfig.from_env().rel_tol == 1e-6
    monkeypatch.delenv(ENV_TOL)
    assert QuadConfig.from_env().rel_tol == QuadConfig().rel_tol
