"""The constituent fading laws: kappa-mu, kappa-mu Extreme and gamma shadowing.

Envelope densities are parameterized by the rms envelope ``r_hat``; the
kappa-mu density carries the ``1/r_hat`` Jacobian so that it integrates to one
in ``r``.  All log-densities broadcast over their array arguments.

Samplers use the Poisson-mixture representation of kappa-mu: given
``P ~ Poisson(mu*kappa)``, the normalized power ``mu(1+kappa) R^2 / r_hat^2`` is
Gamma(mu + P) distributed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .quadrature import QuadConfig, integrate_semi_infinite, require
from .special import log_bessel_i


class ParameterError(ValueError):
    """A model parameter violates its domain."""


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float, np.floating)) and value > 0 and math.isfinite(value)):
        raise ParameterError(f"{name} must be positive")


@dataclass(frozen=True)
class KappaMuParams:
    kappa: float
    mu: float
    r_hat: float = 1.0

    def __post_init__(self):
        _positive("kappa", self.kappa)
        _positive("mu", self.mu)
        _positive("r_hat", self.r_hat)


@dataclass(frozen=True)
class KappaMuExtremeParams:
    m: float

    def __post_init__(self):
        _positive("m", self.m)


@dataclass(frozen=True)
class GammaShadowParams:
    b: float
    omega: float

    def __post_init__(self):
        _positive("b", self.b)
        _positive("omega", self.omega)


class MixedValue(NamedTuple):
    """Point evaluation of a density with an atom at zero."""

    atom_weight: float
    value: float | np.ndarray


@dataclass(frozen=True)
class MixedDensity:
    """Probability ``atom_weight`` at exactly zero plus a density on (0, inf)."""

    atom_weight: float
    continuous: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> MixedValue:
        return MixedValue(self.atom_weight, self.continuous(x))

    def total_mass(self, cfg: QuadConfig | None = None) -> float:
        res = require(integrate_semi_infinite(self.continuous, cfg), "mixed density mass")
        return self.atom_weight + res.value


def _nonneg(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ParameterError(f"{name} must be non-negative")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


# -- kappa-mu ---------------------------------------------------------------


def log_kappa_mu_pdf(r, kappa: float, mu: float, r_hat) -> np.ndarray:
    """log of the kappa-mu envelope density; ``r`` and ``r_hat`` broadcast."""
    r, r_hat = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(r_hat, dtype=float))
    with np.errstate(divide="ignore"):
        log_rho = np.log(r) - np.log(r_hat)
    with np.errstate(under="ignore"):
        rho = np.exp(log_rho)
    const = (
        math.log(2.0 * mu)
        + 0.5 * (mu + 1.0) * math.log1p(kappa)
        - 0.5 * (mu - 1.0) * math.log(kappa)
        - mu * kappa
    )
    z = 2.0 * mu * math.sqrt(kappa * (1.0 + kappa))
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        # far below the scale the Bessel argument may underflow; use the
        # leading series term in logs there
        w = z * rho
        tiny = w < 1e-100
        log_i = np.where(
            tiny,
            (mu - 1.0) * (math.log(0.5 * z) + log_rho) - math.lgamma(mu),
            log_bessel_i(mu - 1.0, np.where(tiny, 1.0, w)),
        )
        out = const - np.log(r_hat) + mu * log_rho - mu * (1.0 + kappa) * rho * rho + log_i
    # r -> 0 behaves like r^(2mu-1)
    zero = r == 0
    if np.any(zero):
        if mu == 0.5:
            lim = const - np.log(r_hat) + (mu - 1.0) * math.log(0.5 * z) - math.lgamma(mu)
        else:
            lim = -np.inf if mu > 0.5 else np.inf
        out = np.where(zero, lim, out)
    return out


def kappa_mu_envelope_pdf(r, p: KappaMuParams):
    r_arr = _nonneg("r", r)
    return _out(np.exp(log_kappa_mu_pdf(r_arr, p.kappa, p.mu, p.r_hat)), r)


def kappa_mu_power_pdf(w, p: KappaMuParams):
    """Density of W = R^2, p_R(sqrt w) / (2 sqrt w).

    At ``w = 0`` the analytic limit is returned: 0 for mu > 1, the finite value
    (1 + kappa) exp(-kappa) / r_hat^2 for mu = 1, and +inf for mu < 1.
    """
    w_arr = _nonneg("w", w)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sqrt(w_arr)
        out = np.exp(log_kappa_mu_pdf(s, p.kappa, p.mu, p.r_hat) - np.log(2.0 * s))
    zero = w_arr == 0
    if np.any(zero):
        if p.mu > 1:
            lim = 0.0
        elif p.mu == 1:
            lim = (1.0 + p.kappa) * math.exp(-p.kappa) / p.r_hat**2
        else:
            lim = np.inf
        out = np.where(zero, lim, out)
    return _out(out, w)


def nakagami_m_equivalent(kappa: float, mu: float) -> float:
    _positive("kappa", kappa)
    _positive("mu", mu)
    return mu * (1.0 + kappa) ** 2 / (1.0 + 2.0 * kappa)


def mu_from_moments(mean_power: float, var_power: float, kappa: float) -> float:
    """mu from the first two moments of the power R^2 and the given kappa."""
    _positive("mean_power", mean_power)
    _positive("var_power", var_power)
    _positive("kappa", kappa)
    return mean_power**2 / var_power * (1.0 + 2.0 * kappa) / (1.0 + kappa) ** 2


def kappa_mu_moment(p: KappaMuParams, k: float, cfg: QuadConfig | None = None) -> float:
    """E[R^k] by quadrature of the envelope density."""
    res = integrate_semi_infinite(
        lambda r: np.exp(k * np.log(r) + log_kappa_mu_pdf(r, p.kappa, p.mu, p.r_hat)), cfg
    )
    return require(res, f"E[R^{k}]").value


# -- kappa-mu Extreme -------------------------------------------------------


def log_kappa_mu_extreme_continuous(r, m: float, r_hat) -> np.ndarray:
    """log of the continuous part of the Extreme envelope density in ``r``."""
    r, r_hat = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(r_hat, dtype=float))
    rho = r / r_hat
    with np.errstate(divide="ignore"):
        return (
            math.log(4.0 * m)
            - np.log(r_hat)
            + log_bessel_i(1.0, 4.0 * m * rho)
            - 2.0 * m * (1.0 + rho * rho)
        )


def kappa_mu_extreme_pdf(rho, p: KappaMuExtremeParams) -> MixedValue:
    """Normalized-envelope density: atom exp(-2m) at 0 plus 4m I1(4m rho) exp(-2m(1+rho^2))."""
    arr = _nonneg("rho", rho)
    val = np.exp(log_kappa_mu_extreme_continuous(arr, p.m, 1.0))
    return MixedValue(math.exp(-2.0 * p.m), _out(val, rho))


def kappa_mu_extreme_density(p: KappaMuExtremeParams) -> MixedDensity:
    return MixedDensity(
        math.exp(-2.0 * p.m),
        lambda rho: np.exp(log_kappa_mu_extreme_continuous(rho, p.m, 1.0)),
    )


# -- gamma shadowing ----------------------------------------------------------


def log_gamma_shadow_pdf(y, b: float, omega: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (b - 1.0) * np.log(y) - y / omega - math.lgamma(b) - b * math.log(omega)
    if b == 1.0:
        out = np.where(y == 0, -math.log(omega), out)
    return out


def gamma_shadow_pdf(y, p: GammaShadowParams):
    """Gamma density with shape b and scale omega; +inf at y = 0 when b < 1."""
    arr = _nonneg("y", y)
    return _out(np.exp(log_gamma_shadow_pdf(arr, p.b, p.omega)), y)


# -- samplers -----------------------------------------------------------------


def sample_kappa_mu(p: KappaMuParams, stream: np.random.Generator, size=None):
    poisson = stream.poisson(p.mu * p.kappa, size=size)
    g = stream.gamma(p.mu + poisson, size=size)
    return p.r_hat * np.sqrt(g / (p.mu * (1.0 + p.kappa)))


def sample_kappa_mu_extreme(p: KappaMuExtremeParams, stream: np.random.Generator, size=None):
    """Normalized envelope draws; exactly 0 with probability exp(-2m)."""
    poisson = stream.poisson(2.0 * p.m, size=size)
    shape = np.where(poisson > 0, poisson, 1)
    g = stream.gamma(shape, size=size)
    return np.where(poisson > 0, np.sqrt(g / (2.0 * p.m)), 0.0)


def sample_gamma_shadow(p: GammaShadowParams, stream: np.random.Generator, size=None):
    return stream.gamma(p.b, p.omega, size=size)
