"""Composite kappa-mu/gamma and kappa-mu Extreme/gamma fading densities.

Three independent routes to the same densities: quadrature of the compound
integral, a finite Bessel-K series, and Monte Carlo compound sampling.
"""

from .base import (
    GammaShadowParams,
    KappaMuExtremeParams,
    KappaMuParams,
    MixedDensity,
    MixedValue,
    ParameterError,
    gamma_shadow_pdf,
    kappa_mu_envelope_pdf,
    kappa_mu_extreme_density,
    kappa_mu_extreme_pdf,
    kappa_mu_moment,
    kappa_mu_power_pdf,
    mu_from_moments,
    nakagami_m_equivalent,
    sample_gamma_shadow,
    sample_kappa_mu,
    sample_kappa_mu_extreme,
)
from .composite import (
    AtomReport,
    CompositeSpec,
    KappaMuShape,
    SeriesConfig,
    SeriesError,
    composite_envelope_pdf_numeric,
    composite_power_pdf_numeric,
    composite_total_mass,
    envelope_pdf_series,
    generalized_k_pdf,
    k_distribution_pdf,
    kappa_mu_gamma_envelope_pdf_series,
    kappa_mu_gamma_power_pdf_series,
    kmu_extreme_gamma_envelope_pdf_series,
    kmu_extreme_gamma_power_pdf_series,
    series_atom_S,
    series_origin_value,
    series_term_integral,
)
from .quadrature import QuadConfig, QuadratureError, QuadResult, integrate_interval, integrate_semi_infinite
from .special import BesselMethod, DomainError, bessel_i, bessel_k, ln_gamma, log_bessel_i, log_bessel_k
from .validation import (
    GoFError,
    GoFReport,
    composite_cdf_numeric,
    composite_quantile,
    goodness_of_fit,
    moment_numeric,
    sample_composite,
)

__version__ = "0.1.0"
