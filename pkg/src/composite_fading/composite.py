"""kappa-mu/gamma and kappa-mu Extreme/gamma composite densities.

Two independent evaluation routes:

* ``*_numeric``: the compound integral over the gamma-distributed shadowing
  variable, done by quadrature.  This is the reference for everything else.
* ``*_series``: the term-wise closed form obtained by expanding the Bessel I
  of the conditional density in powers of its argument and integrating each
  power against the gamma density, which produces a finite sum of Bessel K
  terms.

Compounding variants.  ``root_mean_square`` sets the conditional rms envelope
to ``sqrt(y)`` (the gamma variate plays the role of mean power); this is the
variant the series is derived for.  ``mean_square`` sets it to ``y``.

Series modes.  ``renormalized`` (default) assembles each term from the
Jacobian-correct conditional density and scales the continuous part to its
exact mass (one for kappa-mu/gamma, ``1 - exp(-2m)`` for the Extreme model).
``paper_literal`` assembles terms with the coefficients as printed, in which
the Bessel K order and the powers of x, mu, (1+kappa) and Omega are shifted by
1/2 relative to the Jacobian-correct form, and reports the printed
normalization constant S separately.

Closed form used for each term (``x > 0``)::

    int_0^inf y^(p-1) exp(-a/y - y/Omega) dy = 2 (a Omega)^(p/2) K_p(2 sqrt(a/Omega))

Reference density for the Rayleigh/gamma special case (K distribution)::

    p(x) = 4 x^b / (Gamma(b) Omega^((b+1)/2)) K_(b-1)(2 x / sqrt(Omega))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .base import (
    GammaShadowParams,
    KappaMuExtremeParams,
    MixedValue,
    ParameterError,
    _positive,
    log_gamma_shadow_pdf,
    log_kappa_mu_extreme_continuous,
    log_kappa_mu_pdf,
)
from .quadrature import (
    QuadConfig,
    QuadratureError,
    integrate_interval_batch,
    integrate_semi_infinite,
    integrate_semi_infinite_batch,
    require,
)
from .special import gross_weights, log_bessel_k, log_incomplete_gamma_integral

Compounding = Literal["mean_square", "root_mean_square"]
COMPOUNDINGS = ("mean_square", "root_mean_square")

_CHUNK = 256
# |ln y| beyond this under/overflows; the compound integrand is negligible there
_T_LOG_MAX = 700.0
# half-width in ln y of the scan around the mass centres, scan step, and
# longest tanh-sinh panel
_T_MARGIN = 8.0
_T_STEP = 0.1
_PANEL = 6.0


class SeriesError(ArithmeticError):
    """A series term evaluated to a non-finite value."""


@dataclass(frozen=True)
class KappaMuShape:
    """kappa-mu multipath parameters; the rms envelope comes from the shadowing."""

    kappa: float
    mu: float

    def __post_init__(self):
        _positive("kappa", self.kappa)
        _positive("mu", self.mu)


Multipath = Union[KappaMuShape, KappaMuExtremeParams]


@dataclass(frozen=True)
class CompositeSpec:
    multipath: Multipath
    shadow: GammaShadowParams
    compounding: Compounding = "root_mean_square"

    def __post_init__(self):
        if self.compounding not in COMPOUNDINGS:
            raise ParameterError(f"compounding must be one of {COMPOUNDINGS}")
        if not isinstance(self.multipath, (KappaMuShape, KappaMuExtremeParams)):
            raise ParameterError("multipath must be KappaMuShape or KappaMuExtremeParams")

    @classmethod
    def kappa_mu_gamma(cls, kappa, mu, b, omega, compounding: Compounding = "root_mean_square"):
        return cls(KappaMuShape(kappa, mu), GammaShadowParams(b, omega), compounding)

    @classmethod
    def extreme_gamma(cls, m, b, omega, compounding: Compounding = "root_mean_square"):
        return cls(KappaMuExtremeParams(m), GammaShadowParams(b, omega), compounding)

    @property
    def is_extreme(self) -> bool:
        return isinstance(self.multipath, KappaMuExtremeParams)

    @property
    def atom_weight(self) -> float:
        return math.exp(-2.0 * self.multipath.m) if self.is_extreme else 0.0

    def describe(self) -> dict:
        d = {"compounding": self.compounding, "b": self.shadow.b, "omega": self.shadow.omega}
        if self.is_extreme:
            d.update(model="kmu-extreme-gamma", m=self.multipath.m)
        else:
            d.update(model="kmu-gamma", kappa=self.multipath.kappa, mu=self.multipath.mu)
        return d


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation order and assembly mode of the Bessel-K series.

    ``bessel`` selects the coefficients multiplying each power of the Bessel I
    argument: ``"exact"`` uses the power-series coefficients, ``"gross"`` the
    order-n polynomial weights.  ``paper_literal`` always uses ``"gross"``.
    """

    n: int = 30
    mode: Literal["paper_literal", "renormalized"] = "renormalized"
    bessel: Literal["exact", "gross"] = "exact"

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise ParameterError("n must be a non-negative integer")
        if self.mode not in ("paper_literal", "renormalized"):
            raise ParameterError(f"unknown series mode {self.mode!r}")
        if self.bessel not in ("exact", "gross"):
            raise ParameterError(f"unknown series coefficients {self.bessel!r}")

    def weights(self) -> np.ndarray:
        if self.mode == "paper_literal" or self.bessel == "gross":
            return gross_weights(self.n)
        return np.ones(self.n + 1)


# ---------------------------------------------------------------------------
# numeric oracle
# ---------------------------------------------------------------------------


def _conditional_scale(y: np.ndarray, compounding: str) -> np.ndarray:
    return np.sqrt(y) if compounding == "root_mean_square" else y


def _log_integrand(x: np.ndarray, y: np.ndarray, spec: CompositeSpec) -> np.ndarray:
    """log p(x | y) + log p_Y(y); ``y`` has one row of abscissae per entry of ``x``."""
    r_hat = _conditional_scale(y, spec.compounding)
    xx = x[:, None]
    if spec.is_extreme:
        cond = log_kappa_mu_extreme_continuous(xx, spec.multipath.m, r_hat)
    else:
        cond = log_kappa_mu_pdf(xx, spec.multipath.kappa, spec.multipath.mu, r_hat)
    return cond + log_gamma_shadow_pdf(y, spec.shadow.b, spec.shadow.omega)


def _log_features(x: np.ndarray, spec: CompositeSpec) -> tuple[np.ndarray, np.ndarray]:
    """ln y bracketing the integrand mass.

    The mass sits near y ~ x^2 (rms) or y ~ x (ms), where the conditional
    density peaks, and near the shadowing mean b * Omega.
    """
    peak = 2.0 * np.log(x) if spec.compounding == "root_mean_square" else np.log(x)
    shadow = math.log(spec.shadow.b * spec.shadow.omega)
    return np.minimum(peak, shadow) - _T_MARGIN, np.maximum(peak, shadow) + _T_MARGIN


def _origin_exponents(spec: CompositeSpec) -> tuple[float, float]:
    """Powers of x from the multipath side and the shadowing side as x -> 0.

    The density behaves like x^min(a, c); ``a`` comes from the conditional law
    near zero, ``c`` from the mass of the shadowing law near y = 0.
    """
    a = 1.0 if spec.is_extreme else 2.0 * spec.multipath.mu - 1.0
    b = spec.shadow.b
    c = 2.0 * b - 1.0 if spec.compounding == "root_mean_square" else b - 1.0
    return a, c


def _log_unit_conditional(t: np.ndarray, spec: CompositeSpec) -> np.ndarray:
    if spec.is_extreme:
        return log_kappa_mu_extreme_continuous(t, spec.multipath.m, 1.0)
    return log_kappa_mu_pdf(t, spec.multipath.kappa, spec.multipath.mu, 1.0)


def _origin_value(spec: CompositeSpec, cfg: QuadConfig) -> float:
    a, c = _origin_exponents(spec)
    e = min(a, c)
    if e > 0:
        return 0.0
    if e < 0 or a == c:
        return math.inf
    if a == 0:
        # conditional density is finite at zero: integrate it directly
        f = lambda y: np.exp(_log_integrand(np.zeros(1), y[None, :], spec))[0]
        return require(integrate_semi_infinite(f, cfg), "density at zero").value
    # shadowing-limited: y = x^2 u (rms) or y = x u (ms) and let x -> 0
    b, omega = spec.shadow.b, spec.shadow.omega
    lead = -math.lgamma(b) - b * math.log(omega)
    if spec.compounding == "root_mean_square":
        f = lambda u: np.exp(_log_unit_conditional(u**-0.5, spec) - np.log(u) + lead)
    else:
        f = lambda u: np.exp(_log_unit_conditional(1.0 / u, spec) - np.log(u) + lead)
    return require(integrate_semi_infinite(f, cfg), "density limit at zero").value


def _mass_bracket(x: np.ndarray, spec: CompositeSpec, g_log) -> tuple[np.ndarray, np.ndarray]:
    """Per-row [t_lo, t_hi] outside which ln g is below its maximum minus 40."""
    lo, hi = _log_features(x, spec)
    count = int(np.ceil(np.max(hi - lo) / _T_STEP)) + 1
    s = np.linspace(0.0, 1.0, count)
    t = lo[:, None] + (hi - lo)[:, None] * s[None, :]
    lg = g_log(t, x)
    top = np.max(lg, axis=1, keepdims=True)
    keep = lg > top - 40.0
    first = np.argmax(keep, axis=1)
    last = count - 1 - np.argmax(keep[:, ::-1], axis=1)
    rows = np.arange(len(x))
    step = (hi - lo) / (count - 1)
    t_lo = np.where(np.isfinite(top[:, 0]), t[rows, first] - step, lo)
    t_hi = np.where(np.isfinite(top[:, 0]), t[rows, last] + step, hi)
    return t_lo, t_hi


def _compound_positive(x: np.ndarray, spec: CompositeSpec, cfg: QuadConfig) -> np.ndarray:
    """Compound integral for x > 0, integrated in t = ln y.

    The integrand is first scanned on a grid in t to bracket its mass, which
    may sit in two regions many decades apart.  The bracket is cut into
    panels of bounded length done by tanh-sinh, and the two tails beyond it by
    exp-sinh running outward, so no narrow peak falls between coarse nodes.
    """
    rms = spec.compounding == "root_mean_square"

    def g_log(t, rows):
        # beyond |ln y| = 700 or x / rms > e^300 the integrand is zero in
        # double precision; mask it rather than evaluate inf - inf
        log_rho = np.log(rows)[:, None] - t * (0.5 if rms else 1.0)
        inside = (np.abs(t) < _T_LOG_MAX) & (log_rho < 300.0)
        t = np.where(inside, t, 0.0)
        with np.errstate(under="ignore", over="ignore"):
            lg = _log_integrand(rows, np.exp(t), spec) + t
        return np.where(inside, lg, -np.inf)

    def g(t, rows):
        with np.errstate(under="ignore"):
            return np.exp(g_log(t, rows))

    out = np.empty_like(x)
    for start in range(0, len(x), _CHUNK):
        block = x[start : start + _CHUNK]
        k = len(block)
        t_lo, t_hi = _mass_bracket(block, spec, g_log)
        panels = max(1, int(np.ceil(np.max(t_hi - t_lo) / _PANEL)))
        width = np.repeat((t_hi - t_lo) / panels, panels)[:, None]
        left = (t_lo[:, None] + (t_hi - t_lo)[:, None] / panels * np.arange(panels)[None, :]).reshape(-1, 1)
        prow = np.repeat(block, panels)
        mid = integrate_interval_batch(lambda u: width * g(left + width * u[None, :], prow), 0.0, 1.0, cfg)

        rows2 = np.concatenate([block, block])
        origin = np.concatenate([t_hi, t_lo])[:, None]
        side = np.concatenate([np.ones(k), -np.ones(k)])[:, None]
        tails = integrate_semi_infinite_batch(lambda v: g(origin + side * v[None, :], rows2), cfg)

        value = mid.value.reshape(k, panels).sum(axis=1) + tails.value[:k] + tails.value[k:]
        err = mid.err_estimate.reshape(k, panels).sum(axis=1) + tails.err_estimate[:k] + tails.err_estimate[k:]
        if np.any(err > cfg.target(value)):
            worst = int(np.argmax(err - cfg.target(value)))
            raise QuadratureError(
                f"compound integral did not converge at x={block[worst]!r} for {spec.describe()} "
                f"(err {err[worst]:.3g})"
            )
        out[start : start + _CHUNK] = value
    return out


def composite_envelope_pdf_numeric(x, spec: CompositeSpec, cfg: QuadConfig | None = None) -> MixedValue:
    """Composite envelope density by quadrature of the compound integral.

    Returns the atom at zero (``exp(-2m)`` for the Extreme model, else 0) and
    the continuous density at ``x``.
    """
    cfg = cfg or QuadConfig.from_env()
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise ParameterError("x must be non-negative")
    flat = np.atleast_1d(xa).ravel()
    val = np.empty_like(flat)
    pos = flat > 0
    if np.any(pos):
        val[pos] = _compound_positive(flat[pos], spec, cfg)
    if np.any(~pos):
        val[~pos] = _origin_value(spec, cfg)
    val = val.reshape(xa.shape)
    return MixedValue(spec.atom_weight, float(val) if xa.ndim == 0 else val)


def composite_power_pdf_numeric(w, spec: CompositeSpec, cfg: QuadConfig | None = None) -> MixedValue:
    """Density of the power X^2 from the numeric envelope density (w > 0)."""
    wa = np.asarray(w, dtype=float)
    if np.any(wa <= 0):
        raise ParameterError("w must be positive")
    s = np.sqrt(wa)
    env = composite_envelope_pdf_numeric(s, spec, cfg)
    return MixedValue(env.atom_weight, env.value / (2.0 * s))


def composite_total_mass(spec: CompositeSpec, cfg: QuadConfig | None = None) -> float:
    """atom + integral of the numeric continuous density over (0, inf)."""
    cfg = cfg or QuadConfig.from_env()
    res = integrate_semi_infinite(
        lambda x: composite_envelope_pdf_numeric(x, spec, cfg).value, cfg
    )
    return spec.atom_weight + require(res, f"total mass of {spec.describe()}").value


# ---------------------------------------------------------------------------
# reduction oracles
# ---------------------------------------------------------------------------


def k_distribution_pdf(x, b: float, omega: float):
    """Rayleigh/gamma (K distribution) envelope density, gamma on the mean power."""
    _positive("b", b)
    _positive("omega", omega)
    return generalized_k_pdf(x, 1.0, b, omega)


def generalized_k_pdf(x, m: float, b: float, omega: float):
    """Nakagami-m/gamma envelope density with the mean power Gamma(b, omega).

    4 m^((b+m)/2) x^(b+m-1) K_(b-m)(2x sqrt(m/omega)) / (Gamma(m) Gamma(b) omega^((b+m)/2))
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ParameterError("x must be non-negative")
    flat = np.atleast_1d(xa).ravel()
    out = np.empty_like(flat)
    pos = flat > 0
    if np.any(pos):
        xp = flat[pos]
        out[pos] = np.exp(
            math.log(4.0)
            + 0.5 * (b + m) * (math.log(m) - math.log(omega))
            + (b + m - 1.0) * np.log(xp)
            + log_bessel_k(b - m, 2.0 * xp * math.sqrt(m / omega))
            - math.lgamma(m)
            - math.lgamma(b)
        )
    if np.any(~pos):
        e = 2.0 * min(b, m) - 1.0
        if e > 0:
            out[~pos] = 0.0
        elif e < 0:
            out[~pos] = np.inf
        else:
            # x^(b+m-1) K_|b-m|(c x) -> Gamma(|b-m|)/2 (c/2)^-|b-m| as x -> 0
            d = abs(b - m)
            c = 2.0 * math.sqrt(m / omega)
            out[~pos] = math.exp(
                math.log(4.0)
                + 0.5 * (b + m) * (math.log(m) - math.log(omega))
                + math.lgamma(d) - math.log(2.0) - d * math.log(0.5 * c)
                - math.lgamma(m) - math.lgamma(b)
            ) if d > 0 else np.inf
    out = out.reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out


# ---------------------------------------------------------------------------
# term integrals
# ---------------------------------------------------------------------------


def _term_integral_params(l: int, spec: CompositeSpec, x: float, form: str) -> tuple[float, float]:
    """(p, a) with the term integral = int y^(p-1) exp(-a/y - y/Omega) dy."""
    shift = 0.5 if form == "printed" else 0.0
    b = spec.shadow.b
    if spec.is_extreme:
        m = spec.multipath.m
        return b - l - 1.0 + shift, 2.0 * m * x * x
    kappa, mu = spec.multipath.kappa, spec.multipath.mu
    return b - mu - l + shift, mu * (1.0 + kappa) * x * x


def series_term_integral(
    l: int,
    spec: CompositeSpec,
    x: float,
    method: Literal["closed_form", "numeric"] = "closed_form",
    form: Literal["corrected", "printed"] = "corrected",
    cfg: QuadConfig | None = None,
) -> float:
    """The y-integral multiplying the l-th power of the expanded Bessel I.

    kappa-mu/gamma: ``int y^(p-1) exp(-mu(1+kappa) x^2/y) exp(-y/Omega) dy``;
    Extreme/gamma: ``int y^(p-1) exp(-2m x^2/y) exp(-y/Omega) dy``.  With
    ``form="corrected"`` the exponent follows from the Jacobian-correct
    conditional density (p = b-mu-l, resp. b-l-1); ``form="printed"`` uses the
    printed exponent, larger by 1/2.
    """
    if l < 0 or int(l) != l:
        raise ParameterError("l must be a non-negative integer")
    if x < 0:
        raise ParameterError("x must be non-negative")
    if form not in ("corrected", "printed"):
        raise ParameterError(f"unknown form {form!r}")
    p, a = _term_integral_params(l, spec, x, form)
    omega = spec.shadow.omega
    if method == "closed_form":
        return float(np.exp(log_incomplete_gamma_integral(p, a, 1.0 / omega)))
    if method != "numeric":
        raise ParameterError(f"unknown method {method!r}")
    if a == 0 and p <= 0:
        return math.inf
    # substitute y = y0 u around the mode and factor out the peak, so tiny
    # terms are not cut short by the absolute tolerance
    disc = (p - 1.0) ** 2 + 4.0 * a / omega
    y0 = 0.5 * omega * ((p - 1.0) + math.sqrt(disc)) if a > 0 or p > 1 else omega
    log_f = lambda y: (p - 1.0) * np.log(y) - a / y - y / omega
    peak = float(log_f(y0))
    with np.errstate(over="ignore", divide="ignore"):
        res = integrate_semi_infinite(lambda u: np.exp(log_f(y0 * u) - peak), cfg or QuadConfig.from_env())
    return float(y0 * math.exp(peak) * require(res, f"term integral l={l}").value)


# ---------------------------------------------------------------------------
# series assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Terms:
    """log x^power K_order(arg_scale x) coefficients, one row per l."""

    log_coef: np.ndarray
    power: np.ndarray
    order: np.ndarray
    arg_scale: float


def _kmu_terms(spec: CompositeSpec, sc: SeriesConfig) -> _Terms:
    kappa, mu = spec.multipath.kappa, spec.multipath.mu
    b, omega = spec.shadow.b, spec.shadow.omega
    l = np.arange(sc.n + 1, dtype=float)
    s = 0.25 if sc.mode == "paper_literal" else 0.0
    with np.errstate(divide="ignore"):
        log_w = np.log(sc.weights())
    lg = np.array([math.lgamma(k + 1.0) + math.lgamma(mu + k) for k in l])
    log_coef = (
        log_w
        + math.log(4.0)
        + ((mu + 3 * l + b) / 2 + s) * math.log(mu)
        + l * math.log(kappa)
        + ((mu + b + l) / 2 + s) * math.log1p(kappa)
        - lg
        - mu * kappa
        - math.lgamma(b)
        - ((b + mu + l) / 2 - s) * math.log(omega)
    )
    return _Terms(log_coef, mu + l + b - 1.0 + 2 * s, b - mu - l + 2 * s, 2.0 * math.sqrt(mu * (1.0 + kappa) / omega))


def _extreme_terms(spec: CompositeSpec, sc: SeriesConfig) -> _Terms:
    m = spec.multipath.m
    b, omega = spec.shadow.b, spec.shadow.omega
    l = np.arange(sc.n + 1, dtype=float)
    s = 0.25 if sc.mode == "paper_literal" else 0.0
    with np.errstate(divide="ignore"):
        log_w = np.log(sc.weights())
    lg = np.array([math.lgamma(k + 1.0) + math.lgamma(k + 2.0) for k in l])
    log_coef = (
        log_w
        - 2.0 * m
        + ((b + 3 * l) / 2 + 3.5 + s) * math.log(2.0)
        + ((b + 3 * l) / 2 + 1.5 + s) * math.log(m)
        - lg
        - math.lgamma(b)
        - ((b + l + 1) / 2 - s) * math.log(omega)
    )
    return _Terms(log_coef, b + l + 2 * s, b - l - 1.0 + 2 * s, 2.0 * math.sqrt(2.0 * m / omega))


def _terms(spec: CompositeSpec, sc: SeriesConfig) -> _Terms:
    if spec.compounding != "root_mean_square":
        raise ParameterError("the series is derived for root_mean_square compounding only")
    return _extreme_terms(spec, sc) if spec.is_extreme else _kmu_terms(spec, sc)


def _log_term_matrix(x: np.ndarray, t: _Terms) -> np.ndarray:
    lx = np.log(x)
    rows = []
    for i in range(len(t.log_coef)):
        with np.errstate(divide="ignore", over="ignore"):
            row = t.log_coef[i] + t.power[i] * lx + log_bessel_k(t.order[i], t.arg_scale * x)
        if np.any(np.isnan(row)) or np.any(row == np.inf):
            raise SeriesError(f"series term l={i} is not finite")
        rows.append(row)
    return np.array(rows)


def _log_term_mass(t: _Terms) -> np.ndarray:
    """log of int_0^inf c x^a K_nu(z x) dx = c 2^(a-1) z^(-a-1) G((1+a+nu)/2) G((1+a-nu)/2)."""
    a, nu, z = t.power, t.order, t.arg_scale
    g1 = (1.0 + a + nu) / 2
    g2 = (1.0 + a - nu) / 2
    if np.any(g1 <= 0) or np.any(g2 <= 0):
        raise SeriesError("term mass diverges")
    lg = np.array([math.lgamma(u) + math.lgamma(v) for u, v in zip(g1, g2)])
    return t.log_coef + (a - 1.0) * math.log(2.0) - (a + 1.0) * math.log(z) + lg


def _logsumexp(rows: np.ndarray) -> np.ndarray:
    # every term is positive (positive coefficients times K > 0)
    top = np.max(rows, axis=0)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(under="ignore"):
        return np.where(np.isfinite(top), safe + np.log(np.sum(np.exp(rows - safe), axis=0)), top)


def series_continuous_mass(spec: CompositeSpec, sc: SeriesConfig) -> float:
    """Closed-form mass of the unscaled continuous series sum."""
    return float(np.exp(_logsumexp(_log_term_mass(_terms(spec, sc))[:, None]))[0])


def _series_raw(x, spec: CompositeSpec, sc: SeriesConfig) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise ParameterError("x must be positive")
    flat = np.atleast_1d(xa).ravel()
    t = _terms(spec, sc)
    return np.exp(_logsumexp(_log_term_matrix(flat, t))).reshape(xa.shape)


def _series_continuous(x, spec: CompositeSpec, sc: SeriesConfig) -> np.ndarray:
    raw = _series_raw(x, spec, sc)
    if sc.mode == "paper_literal":
        return raw
    target = 1.0 - spec.atom_weight
    return raw * (target / series_continuous_mass(spec, sc))


def series_origin_value(spec: CompositeSpec, sc: SeriesConfig = SeriesConfig()) -> float:
    """Limit of the continuous series density as x -> 0+.

    Uses x^a K_nu(z x) ~ Gamma(|nu|)/2 (z/2)^-|nu| x^(a-|nu|) for nu != 0.
    """
    t = _terms(spec, sc)
    expo = t.power - np.abs(t.order)
    if np.any(expo < 0) or np.any((expo == 0) & (t.order == 0)):
        return math.inf
    total = 0.0
    for i in np.flatnonzero(expo == 0):
        nu = abs(t.order[i])
        total += math.exp(
            t.log_coef[i] + math.lgamma(nu) - math.log(2.0) - nu * math.log(0.5 * t.arg_scale)
        )
    if sc.mode == "renormalized":
        total *= (1.0 - spec.atom_weight) / series_continuous_mass(spec, sc)
    return total


def _scalar(v, like):
    return float(v) if np.ndim(like) == 0 else v


def _require_kind(spec: CompositeSpec, extreme: bool) -> None:
    if spec.is_extreme != extreme:
        want = "kappa-mu Extreme" if extreme else "kappa-mu"
        raise ParameterError(f"this evaluator needs a {want} multipath spec")


def kappa_mu_gamma_envelope_pdf_series(x, spec: CompositeSpec, sc: SeriesConfig = SeriesConfig()):
    """kappa-mu/gamma envelope density as a finite Bessel-K series (x > 0).

    In ``paper_literal`` mode the printed term sum is returned as is; the
    accompanying atom is available from :func:`series_atom_S`.
    """
    _require_kind(spec, False)
    return _scalar(_series_continuous(x, spec, sc), x)


def kappa_mu_gamma_power_pdf_series(w, spec: CompositeSpec, sc: SeriesConfig = SeriesConfig()):
    _require_kind(spec, False)
    wa = np.asarray(w, dtype=float)
    s = np.sqrt(wa)
    return _scalar(_series_continuous(s, spec, sc) / (2.0 * s), w)


def _printed_S_kmu(spec: CompositeSpec, n: int) -> float:
    kappa, mu = spec.multipath.kappa, spec.multipath.mu
    b, omega = spec.shadow.b, spec.shadow.omega
    w = gross_weights(n)
    total = 0.0
    for l in range(n + 1):
        if w[l] == 0:
            continue
        total += math.exp(
            math.log(w[l])
            + l * math.log(kappa)
            + 0.5 * math.log(omega)
            + (l + 0.5) * math.log(mu)
            + math.lgamma(mu + 0.5)
            - math.lgamma(l + 1.0)
            - mu * kappa
            - math.lgamma(b)
            - 0.25 * math.log(2.0)
        )
    return 1.0 - total


def _printed_S_extreme(spec: CompositeSpec, n: int) -> float:
    m = spec.multipath.m
    b, omega = spec.shadow.b, spec.shadow.omega
    w = gross_weights(n)
    total = 0.0
    for l in range(n + 1):
        if w[l] == 0:
            continue
        total += math.exp(
            math.log(w[l])
            + (l - b + 3) / 2 * math.log(2.0)
            + ((l - b) / 2 + 0.75) * math.log(m)
            + math.lgamma(b + 0.5)
            - math.lgamma(l + 2.0)
            - math.lgamma(b)
            + ((b + l) / 2 + 1.25) * math.log(omega)
        )
    e = math.exp(-2.0 * m)
    return 1.0 - e - e * total


@dataclass(frozen=True)
class AtomReport:
    """Normalization constant of the series: printed vs computed.

    ``printed`` is the printed closed form; ``closed_form`` is
    ``1 - atom - mass`` with the mass of the continuous term sum integrated
    term by term exactly; ``quadrature`` is the same with the mass obtained by
    numerical integration of the sum.
    """

    printed: float
    closed_form: float
    quadrature: float

    @property
    def gap(self) -> float:
        return abs(self.printed - self.quadrature)


def series_atom_S(spec: CompositeSpec, sc: SeriesConfig = SeriesConfig(), cfg: QuadConfig | None = None) -> AtomReport:
    """The atom S that would make the continuous series sum a probability law.

    For the Extreme model the exact atom ``exp(-2m)`` is subtracted as well,
    so ``closed_form`` and ``quadrature`` measure only the truncation defect.
    """
    printed = _printed_S_extreme(spec, sc.n) if spec.is_extreme else _printed_S_kmu(spec, sc.n)
    raw_sc = sc
    atom = spec.atom_weight
    closed = 1.0 - atom - series_continuous_mass(spec, raw_sc)
    res = integrate_semi_infinite(lambda x: _series_raw(x, spec, raw_sc), cfg or QuadConfig.from_env())
    quad = 1.0 - atom - require(res, "series mass").value
    return AtomReport(printed, closed, quad)


def kmu_extreme_gamma_envelope_pdf_series(x, spec: CompositeSpec, sc: SeriesConfig = SeriesConfig()) -> MixedValue:
    """kappa-mu Extreme/gamma envelope density as a Bessel-K series (x > 0).

    ``renormalized``: atom ``exp(-2m)`` and the continuous part scaled to mass
    ``1 - exp(-2m)``.  ``paper_literal``: the printed term sum with the
    printed constant S as the atom.
    """
    _require_kind(spec, True)
    cont = _scalar(_series_continuous(x, spec, sc), x)
    atom = _printed_S_extreme(spec, sc.n) if sc.mode == "paper_literal" else spec.atom_weight
    return MixedValue(atom, cont)


def kmu_extreme_gamma_power_pdf_series(w, spec: CompositeSpec, sc: SeriesConfig = SeriesConfig()) -> MixedValue:
    """Power-domain counterpart; the atom at zero carries over unchanged."""
    wa = np.asarray(w, dtype=float)
    s = np.sqrt(wa)
    env = kmu_extreme_gamma_envelope_pdf_series(s, spec, sc)
    return MixedValue(env.atom_weight, _scalar(np.asarray(env.value) / (2.0 * s), w))


def envelope_pdf_series(x, spec: CompositeSpec, sc: SeriesConfig = SeriesConfig()) -> MixedValue:
    """Dispatch to the series of whichever composite ``spec`` describes."""
    if spec.is_extreme:
        return kmu_extreme_gamma_envelope_pdf_series(x, spec, sc)
    return MixedValue(0.0, kappa_mu_gamma_envelope_pdf_series(x, spec, sc))
