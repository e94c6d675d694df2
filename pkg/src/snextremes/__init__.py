"""Skew-normal tail theory and Gumbel convergence of sample maxima."""

from .errors import (
    DomainError,
    ExpansionOverflowError,
    ExportError,
    PrecisionError,
    SNError,
    SolverError,
    UsageError,
)
from .sn_core import Shape, cdf, log_pdf, log_survival, pdf, sample, survival
from .tail_theory import mills_bounds_normal, mills_bounds_sn, mills_ratio_sn, tail_model
from .norming import NormingPair, closed_form_norming, quantile_norming, solve_quantile_bn
from .expansion import gumbel, kappa, leading_rate, omega, second_order_limit
from .diagnostics import RateRecord, SimulationSummary, monte_carlo_maxima, rate_ratio_scan

__version__ = "0.1.0"
