"""Saddle-point local-limit approximations for densities of normalized sums.

The package evaluates the refined density-ratio approximation
p_n(x)/phi(x) ~ exp{n tau^3 lambda(tau) - mu(tau)} for i.i.d. sums with
mean 0 and variance 1, builds every ingredient from the cumulants up
(power-series reversion, Cramer series, saddle solve), cross-checks the
prediction against exact density oracles, and audits the quantitative
inequalities that back the error law.
"""
from .bounds import BoundAudit, run_audit_suite
from .density import DensityGrid, density_cf_inversion, density_exact, grid_convolve
from .dist import DistributionSpec, cf, cgf, cumulants, make_family, orlicz_alpha
from .richter import (
    GridPolicy,
    RichterEvaluation,
    edgeworth_ratio,
    error_table,
    richter13_ratio,
    richter_ratio,
    tsallis_restricted,
)
from .saddle import SaddleSolution, lambda_mu_at, solve_saddle, tau_range
from .series import CumulantVector, PowerSeries, cramer_series, mu_series, revert

__version__ = "0.1.0"

__all__ = [
    "BoundAudit",
    "CumulantVector",
    "DensityGrid",
    "DistributionSpec",
    "GridPolicy",
    "PowerSeries",
    "RichterEvaluation",
    "SaddleSolution",
    "cf",
    "cgf",
    "cramer_series",
    "cumulants",
    "density_cf_inversion",
    "density_exact",
    "edgeworth_ratio",
    "error_table",
    "grid_convolve",
    "lambda_mu_at",
    "make_family",
    "mu_series",
    "orlicz_alpha",
    "revert",
    "richter13_ratio",
    "richter_ratio",
    "run_audit_suite",
    "solve_saddle",
    "tau_range",
    "tsallis_restricted",
]
