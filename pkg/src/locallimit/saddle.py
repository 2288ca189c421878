"""Saddle-point machinery: solve K'(z) = tau and evaluate lambda, mu, psi.

The solver is a Newton iteration safeguarded by bisection on a bracket
that always contains the root (K' is strictly increasing on the real
domain).  Near tau = 0 the direct formula for lambda loses roughly
ulp(tau)/tau^3 absolute accuracy to cancellation, so evaluation switches
to the truncated series below ``TAU_SWITCH``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import dist
from .dist import DistributionSpec, cgf
from .series import DEFAULT_ORDER, PowerSeries, cramer_series, mu_series, saddle_point_series

__all__ = [
    "TAU_SWITCH",
    "NEWTON_TOL",
    "SaddleSolution",
    "SaddleConvergenceError",
    "solve_saddle",
    "lambda_mu_at",
    "tau_range",
    "tau_domain",
]

# Below this |tau| the closed formula for lambda is dominated by rounding
# of the O(tau^2) terms; the order-12 series is exact to ~1e-14 there.
TAU_SWITCH = 4e-3

NEWTON_TOL = 1e-12
MAX_ITER = 100

# Theorem-scale constant tau0 = c0 alpha^3 / (M^2 n0).
C0 = 1.0 / 6400.0


class SaddleConvergenceError(RuntimeError):
    def __init__(self, tau: float, z_last: float, residual: float, iterations: int):
        self.tau = tau
        self.z_last = z_last
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"saddle solve failed at tau={tau!r}: z={z_last!r}, "
            f"residual={residual!r} after {iterations} iterations"
        )


@dataclass(frozen=True)
class SaddleSolution:
    tau: float
    z0: float
    rho: tuple[float, float]  # (K''(z0), K'''(z0))
    residual: float
    iterations: int


def tau_domain(d: DistributionSpec) -> tuple[float, float]:
    """Open interval of tau for which K'(z) = tau is solvable on the real domain."""
    if d.family == "gaussian":
        return (-math.inf, math.inf)
    if d.family == "uniform_sym":
        # K' ranges over (-sqrt(3), sqrt(3)) on the real line
        return (-dist.SQRT3, dist.SQRT3)
    if d.family == "exp_centered":
        return (-1.0, math.inf)
    r = d.cgf_domain_radius
    return (cgf(d, -r, 1), cgf(d, r, 1))


def _z_limit(d: DistributionSpec) -> float:
    if d.family == "exp_centered":
        return d.cgf_domain_radius
    if math.isinf(d.cgf_domain_radius):
        return 200.0  # sinh/cosh stay representable well past any admissible tau
    return d.cgf_domain_radius


def solve_saddle(d: DistributionSpec, tau: float) -> SaddleSolution:
    """Solve K'(z0) = tau on the real line.

    Newton from the truncated z0 series, safeguarded by bisection on a
    sign-changing bracket; |z0| <= 2 |tau| guarantees the initial
    bracket inside the certified disc, and the bracket is expanded
    geometrically outside it.
    """
    lo_dom, hi_dom = tau_domain(d)
    if not (lo_dom < tau < hi_dom):
        raise ValueError(f"tau={tau!r} outside the admissible range ({lo_dom!r}, {hi_dom!r})")
    if tau == 0.0:
        return SaddleSolution(0.0, 0.0, (cgf(d, 0.0, 2), cgf(d, 0.0, 3)), 0.0, 0)

    zmax = _z_limit(d)
    lo, hi = (0.0, min(2.0 * tau, zmax)) if tau > 0 else (max(2.0 * tau, -zmax), 0.0)
    # grow the bracket until K' straddles tau (always true inside the
    # certified disc, needed beyond it)
    for _ in range(200):
        if tau > 0 and cgf(d, hi, 1) >= tau:
            break
        if tau < 0 and cgf(d, lo, 1) <= tau:
            break
        if tau > 0:
            hi = min(zmax, hi * 1.6 + 1e-6) if hi < zmax else zmax
            if hi == zmax and cgf(d, hi, 1) < tau:
                raise ValueError(f"tau={tau!r} not attained by K' on the evaluable domain")
        else:
            lo = max(-zmax, lo * 1.6 - 1e-6) if lo > -zmax else -zmax
            if lo == -zmax and cgf(d, lo, 1) > tau:
                raise ValueError(f"tau={tau!r} not attained by K' on the evaluable domain")
    else:
        raise SaddleConvergenceError(tau, hi if tau > 0 else lo, math.inf, 0)

    z = _initial_guess(d, tau)
    if not (lo <= z <= hi):
        z = 0.5 * (lo + hi)
    residual = cgf(d, z, 1) - tau
    iterations = 0
    while abs(residual) > NEWTON_TOL:
        iterations += 1
        if iterations > MAX_ITER:
            raise SaddleConvergenceError(tau, z, abs(residual), iterations)
        if residual > 0:
            hi = min(hi, z)
        else:
            lo = max(lo, z)
        kpp = cgf(d, z, 2)
        step = residual / kpp if kpp > 0 else math.inf
        z_new = z - step
        if not (lo < z_new < hi):
            z_new = 0.5 * (lo + hi)
        if z_new == z:
            break  # double-precision floor
        z = z_new
        residual = cgf(d, z, 1) - tau
    return SaddleSolution(tau, z, (cgf(d, z, 2), cgf(d, z, 3)), abs(residual), iterations)


@lru_cache(maxsize=64)
def _series_bundle(d: DistributionSpec) -> tuple[PowerSeries, PowerSeries, PowerSeries]:
    """(z0, lambda, mu) series at the default truncation order."""
    c = dist.cumulants(d, DEFAULT_ORDER + 3)
    return (
        saddle_point_series(c, DEFAULT_ORDER),
        cramer_series(c, DEFAULT_ORDER),
        mu_series(c, DEFAULT_ORDER),
    )


def _initial_guess(d: DistributionSpec, tau: float) -> float:
    if abs(tau) > 0.5:
        return 0.0  # series guess only trustworthy near the origin
    z0s, _, _ = _series_bundle(d)
    return z0s(tau)


def lambda_mu_at(d: DistributionSpec, tau: float) -> tuple[float, float]:
    """(lambda(tau), mu(tau)).

    Direct formula on the solved saddle point for |tau| >= TAU_SWITCH;
    truncated series through the removable singularity below it.
    """
    if abs(tau) < TAU_SWITCH:
        _, lam, mu = _series_bundle(d)
        return (lam(tau), mu(tau))
    sol = solve_saddle(d, tau)
    psi_num = cgf(d, sol.z0, 0) - tau * sol.z0 + 0.5 * tau * tau
    lam = psi_num / tau ** 3
    mu = 0.5 * math.log(sol.rho[0])
    return (lam, mu)


def psi_at(d: DistributionSpec, tau: float) -> float:
    """psi(tau) = tau^3 lambda(tau)."""
    lam, _ = lambda_mu_at(d, tau)
    return tau ** 3 * lam


def tau_range(d: DistributionSpec) -> tuple[float, float]:
    """(tau0_theorem, tau0_analytic).

    tau0_analytic = alpha^3/32 is the certified saddle/series radius;
    tau0_theorem = min(alpha^3/32, c0 alpha^3/(M^2 n0)) with c0 = 1/6400
    is the scale on which the refined error law is stated.
    """
    a3 = d.alpha ** 3
    analytic = a3 / 32.0
    theorem = min(analytic, C0 * a3 / (d.density_bound_M ** 2 * d.n0))
    return (theorem, analytic)
