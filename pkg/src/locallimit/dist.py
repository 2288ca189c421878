"""Normalized distribution families (mean 0, variance 1) and their transforms.

Four families are supported: ``gaussian``, ``uniform_sym`` (uniform on
[-sqrt(3), sqrt(3)]), ``exp_centered`` (standard exponential shifted by -1)
and ``grid`` (a tabulated density, standardized at construction).  The
built-ins carry closed-form characteristic function, log-Laplace transform
and cumulants; the grid family computes all transforms by composite
Simpson quadrature on its support.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping

import numpy as np

from .series import CUMULANT_TOL, CumulantVector, PowerSeries

__all__ = [
    "FAMILIES",
    "SQRT3",
    "DistributionSpec",
    "CgfDomainError",
    "make_family",
    "cf",
    "cgf",
    "cumulants",
    "orlicz_alpha",
    "orlicz_alpha_from_envelope",
    "base_density",
]

FAMILIES = ("gaussian", "uniform_sym", "exp_centered", "grid")
SQRT3 = math.sqrt(3.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Exact Bernoulli numbers feeding the symmetric-uniform cumulants
# kappa_{2j} = 12^j B_{2j} / (2j).
_BERNOULLI = {
    2: Fraction(1, 6),
    4: Fraction(-1, 30),
    6: Fraction(1, 42),
    8: Fraction(-1, 30),
    10: Fraction(5, 66),
    12: Fraction(-691, 2730),
    14: Fraction(7, 6),
    16: Fraction(-3617, 510),
    18: Fraction(43867, 798),
    20: Fraction(-174611, 330),
}

MAX_GRID_CUMULANT_ORDER = 16


class CgfDomainError(ValueError):
    """Evaluation point outside the domain of the log-Laplace transform."""


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """A standardized law together with the constants used downstream.

    ``alpha`` is the Orlicz parameter of E e^{alpha |X|} <= 2,
    ``density_bound_M`` the essential sup of the density of Z_{n0} and
    ``n0`` the smallest n with a bounded density.  Instances are
    immutable and hashable by identity, so pure functions of a spec can
    be cached.
    """

    family: str
    params: Mapping[str, Any]
    mean: float
    variance: float
    alpha: float
    density_bound_M: float
    n0: int
    cgf_domain_radius: float


def std_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _exp_abs_moment_map(family: str, params: Mapping[str, Any]) -> Callable[[float], float]:
    """alpha -> E e^{alpha |X|}, strictly increasing on the searched range."""
    if family == "gaussian":
        return lambda a: 2.0 * math.exp(0.5 * a * a) * std_normal_cdf(a)
    if family == "uniform_sym":
        return lambda a: (math.expm1(SQRT3 * a)) / (SQRT3 * a) if a > 0 else 1.0
    if family == "exp_centered":
        def emom(a: float) -> float:
            if a >= 1.0:
                return math.inf
            return (math.exp(a) - math.exp(-1.0)) / (1.0 + a) + math.exp(-1.0) / (1.0 - a)

        return emom
    if family == "grid":
        xs = params["xs"]
        ps = params["ps"]
        return lambda a: _grid_quad(xs, ps * np.exp(a * np.abs(xs)))
    raise ValueError(f"unknown family {family!r}")


def _bisect_increasing(f: Callable[[float], float], target: float, lo: float, hi: float,
                       tol: float = 1e-12) -> float:
    flo = f(lo)
    fhi = f(hi)
    if not (flo < target):
        raise ValueError("lower bracket already exceeds the target")
    if not (fhi > target):
        raise ValueError("exponential moment never reaches the target on the searched range")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def orlicz_alpha(d: DistributionSpec) -> float:
    """Largest alpha with E e^{alpha |X|} <= 2, by bisection.

    A grid family constructed with an (b, B) exponential-moment envelope
    uses the conservative fallback b / log2(max(B, 2)) instead.
    """
    return _alpha_for(d.family, d.params)


def _alpha_for(family: str, params: Mapping[str, Any]) -> float:
    if family == "grid" and "b" in params and "B" in params:
        return orlicz_alpha_from_envelope(params["b"], params["B"])
    emom = _exp_abs_moment_map(family, params)
    hi = 1.0 - 1e-13 if family == "exp_centered" else 2.0
    return _bisect_increasing(emom, 2.0, 1e-12, hi)


def orlicz_alpha_from_envelope(b: float, B: float) -> float:
    """Conservative alpha from E e^{b|X|} <= B."""
    if b <= 0:
        raise ValueError("b must be positive")
    return b / math.log2(max(B, 2.0))


# ---------------------------------------------------------------------------
# construction

_BUILTIN_CONSTANTS = {
    # family -> (density_bound_M, n0, cgf_domain_radius)
    "gaussian": (INV_SQRT_2PI, 1, math.inf),
    "uniform_sym": (1.0 / (2.0 * SQRT3), 1, math.inf),
    "exp_centered": (1.0, 1, 0.95),
}


def make_family(name: str, params: Mapping[str, Any] | None = None) -> DistributionSpec:
    params = dict(params or {})
    if name in _BUILTIN_CONSTANTS:
        M, n0, radius = _BUILTIN_CONSTANTS[name]
        spec = DistributionSpec(
            family=name, params={}, mean=0.0, variance=1.0,
            alpha=_alpha_for(name, {}), density_bound_M=M, n0=n0,
            cgf_domain_radius=radius,
        )
    elif name == "grid":
        spec = _make_grid(params)
    else:
        raise ValueError(f"unknown family {name!r}")
    if not spec.alpha < 1.0:
        raise ValueError("Orlicz parameter must satisfy alpha < 1 for a unit-variance law")
    if spec.density_bound_M < 1.0 / 12.0:
        raise ValueError("density bound below the 1/(12 sigma) floor; inconsistent input")
    if spec.cgf_domain_radius < spec.alpha / 2.0:
        raise ValueError("cgf domain radius must cover alpha/2")
    return spec


def _make_grid(params: Mapping[str, Any]) -> DistributionSpec:
    p = dict(params)
    if "path" in p:
        data = np.loadtxt(p.pop("path"), comments="#")
        if data.ndim != 2 or data.shape[1] != 2:
            raise ValueError("grid file must contain two whitespace-separated columns")
        xs, ps = data[:, 0].astype(float), data[:, 1].astype(float)
    else:
        xs = np.asarray(p.pop("xs"), dtype=float)
        ps = np.asarray(p.pop("ps"), dtype=float)
    if xs.ndim != 1 or xs.shape != ps.shape or xs.size < 8:
        raise ValueError("grid too coarse: need at least 8 (x, density) samples")
    h = np.diff(xs)
    if not np.all(h > 0) or not np.allclose(h, h[0], rtol=1e-8, atol=0.0):
        raise ValueError("grid abscissae must be strictly increasing and equispaced")
    if np.any(ps < 0) or not np.all(np.isfinite(ps)):
        raise ValueError("grid density must be finite and nonnegative")

    mass = _grid_quad(xs, ps)
    if mass <= 0:
        raise ValueError("grid density has nonpositive mass; cannot normalize")
    ps = ps / mass
    mean = _grid_quad(xs, xs * ps)
    var = _grid_quad(xs, (xs - mean) ** 2 * ps)
    if var <= 0:
        raise ValueError("grid too coarse: nonpositive variance")
    sigma = math.sqrt(var)
    xs_std = (xs - mean) / sigma
    ps_std = ps * sigma

    n0 = int(p.pop("n0", 1))
    if n0 < 1:
        raise ValueError("n0 must be a positive integer")
    M = float(p.pop("density_bound", float(np.max(ps_std))))
    radius = float(p.pop("cgf_domain_radius", 1.0))
    keep = {"xs": xs_std, "ps": ps_std, **p}
    return DistributionSpec(
        family="grid", params=keep, mean=0.0, variance=1.0,
        alpha=_alpha_for("grid", keep), density_bound_M=M, n0=n0,
        cgf_domain_radius=radius,
    )


# ---------------------------------------------------------------------------
# quadrature over the tabulated support (composite Simpson)

def _grid_quad(xs: np.ndarray, vals: np.ndarray) -> float:
    h = (xs[-1] - xs[0]) / (xs.size - 1)
    n = xs.size
    if n < 3:
        return float(np.trapezoid(vals, xs))
    if n % 2 == 1:
        w = np.ones(n)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return float(np.dot(w, vals) * h / 3.0)
    # even point count: Simpson on the first n-1 points, trapezoid on the last panel
    return _grid_quad(xs[:-1], vals[:-1]) + 0.5 * h * float(vals[-2] + vals[-1])


def _grid_quad_c(xs: np.ndarray, vals: np.ndarray) -> complex:
    return complex(_grid_quad(xs, np.real(vals)), _grid_quad(xs, np.imag(vals)))


# ---------------------------------------------------------------------------
# characteristic function

def cf(d: DistributionSpec, t: float) -> complex:
    """f(t) = E e^{itX}."""
    if d.family == "gaussian":
        return complex(math.exp(-0.5 * t * t), 0.0)
    if d.family == "uniform_sym":
        u = SQRT3 * t
        val = math.sin(u) / u if u != 0.0 else 1.0
        return complex(val, 0.0)
    if d.family == "exp_centered":
        return cmath.exp(complex(0.0, -t)) / complex(1.0, -t)
    xs, ps = d.params["xs"], d.params["ps"]
    return _grid_quad_c(xs, ps * np.exp(1j * t * xs))


def cf_abs(d: DistributionSpec, t: float) -> float:
    if d.family == "gaussian":
        return math.exp(-0.5 * t * t)
    if d.family == "uniform_sym":
        u = SQRT3 * t
        return abs(math.sin(u) / u) if u != 0.0 else 1.0
    if d.family == "exp_centered":
        return 1.0 / math.sqrt(1.0 + t * t)
    return abs(cf(d, t))


def cf_envelope(d: DistributionSpec, t: float) -> float:
    """Monotone upper bound for |f| at |t'| >= t, used beyond quadrature windows."""
    t = abs(t)
    if d.family == "gaussian":
        return math.exp(-0.5 * t * t)
    if d.family == "uniform_sym":
        return min(1.0, 1.0 / (SQRT3 * t)) if t > 0 else 1.0
    if d.family == "exp_centered":
        return 1.0 / math.sqrt(1.0 + t * t)
    raise ValueError("no closed-form characteristic-function envelope for the grid family")


# ---------------------------------------------------------------------------
# log-Laplace transform K and derivatives

# Below this |z| the closed uniform_sym forms lose digits to cancellation;
# the cumulant series is exact to ~1e-15 there.
_UNIFORM_SERIES_CUT = 0.25


def cgf(d: DistributionSpec, z: float, order: int = 0) -> float:
    """K^(order)(z) for order in 0..3, K(z) = log E e^{zX}."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be one of 0, 1, 2, 3")
    if d.family == "exp_centered" and z >= 1.0:
        raise CgfDomainError("log-Laplace transform of exp_centered requires z < 1")
    if abs(z) > d.cgf_domain_radius:
        raise CgfDomainError(
            f"|z| = {abs(z)!r} outside the declared domain radius {d.cgf_domain_radius!r}"
        )
    if d.family == "gaussian":
        return (0.5 * z * z, z, 1.0, 0.0)[order]
    if d.family == "uniform_sym":
        return _cgf_uniform(z, order)
    if d.family == "exp_centered":
        if order == 0:
            return -z - math.log1p(-z)
        if order == 1:
            return z / (1.0 - z)
        if order == 2:
            return (1.0 - z) ** -2
        return 2.0 * (1.0 - z) ** -3
    return _cgf_grid(d, z, order)


def _uniform_gamma(k: int) -> float:
    """Cumulant gamma_k of the symmetric uniform law (exact rational)."""
    if k % 2 == 1 or k < 2:
        return 0.0
    j = k // 2
    if k > max(_BERNOULLI):
        raise ValueError(f"uniform_sym cumulants tabulated only through order {max(_BERNOULLI)}")
    return float(Fraction(12) ** j * _BERNOULLI[k] / k)


def _cgf_uniform(z: float, order: int) -> float:
    if abs(z) <= _UNIFORM_SERIES_CUT:
        # K(z) = z^2/2 + sum gamma_{2j} z^{2j}/(2j)!, truncation error < 1e-15 here
        val = 0.0
        for k in range(2, 17, 2):
            if k - order < 0:
                continue
            coeff = _uniform_gamma(k) / math.factorial(k)
            fall = 1.0
            for i in range(order):
                fall *= (k - i)
            val += coeff * fall * z ** (k - order)
        return val
    u = SQRT3 * z
    if order == 0:
        return math.log(math.sinh(u) / u) if u > 0 else math.log(math.sinh(-u) / -u)
    if order == 1:
        return SQRT3 / math.tanh(u) - 1.0 / z
    if order == 2:
        return 1.0 / (z * z) - 3.0 / math.sinh(u) ** 2
    return -2.0 / z ** 3 + 2.0 * SQRT3 ** 3 * math.cosh(u) / math.sinh(u) ** 3


def _cgf_grid(d: DistributionSpec, z: float, order: int) -> float:
    xs, ps = d.params["xs"], d.params["ps"]
    w = ps * np.exp(z * xs)
    L = _grid_quad(xs, w)
    if L <= 0:
        raise CgfDomainError("Laplace transform quadrature collapsed; z too large for the grid")
    if order == 0:
        return math.log(L)
    L1 = _grid_quad(xs, xs * w)
    if order == 1:
        return L1 / L
    L2 = _grid_quad(xs, xs ** 2 * w)
    if order == 2:
        return L2 / L - (L1 / L) ** 2
    L3 = _grid_quad(xs, xs ** 3 * w)
    r1, r2, r3 = L1 / L, L2 / L, L3 / L
    return r3 - 3.0 * r2 * r1 + 2.0 * r1 ** 3


# ---------------------------------------------------------------------------
# cumulants

def cumulants(d: DistributionSpec, up_to: int) -> CumulantVector:
    if up_to < 2:
        raise ValueError("up_to must be at least 2")
    if d.family == "gaussian":
        g = [0.0] * (up_to + 1)
        g[2] = 1.0
        return CumulantVector.from_gammas(g)
    if d.family == "uniform_sym":
        g = [0.0] * (up_to + 1)
        for k in range(2, up_to + 1):
            g[k] = _uniform_gamma(k)
        return CumulantVector.from_gammas(g)
    if d.family == "exp_centered":
        g = [0.0, 0.0] + [float(math.factorial(k - 1)) for k in range(2, up_to + 1)]
        return CumulantVector.from_gammas(g)
    return _cumulants_grid(d, up_to)


def _cumulants_grid(d: DistributionSpec, up_to: int) -> CumulantVector:
    if up_to > MAX_GRID_CUMULANT_ORDER:
        raise ValueError(
            f"grid-family cumulants supported through order {MAX_GRID_CUMULANT_ORDER}"
        )
    xs, ps = d.params["xs"], d.params["ps"]
    # log of the moment series sum_k m_k z^k / k!
    moments = [_grid_quad(xs, xs ** k * ps) for k in range(up_to + 1)]
    mser = PowerSeries([m / math.factorial(k) for k, m in enumerate(moments)])
    mser = PowerSeries((1.0,) + mser.coeffs[1:])  # quadrature mass drift out of the log
    kser = mser.log()
    gammas = [kser[k] * math.factorial(k) for k in range(up_to + 1)]
    gammas[0] = 0.0
    if abs(gammas[1]) > 1e-9 or abs(gammas[2] - 1.0) > 1e-7:
        raise ValueError("grid cumulants inconsistent with standardization; grid too coarse")
    gammas[1] = 0.0
    gammas[2] = 1.0
    return CumulantVector.from_gammas(gammas, tol=CUMULANT_TOL)


# ---------------------------------------------------------------------------
# base density (of X itself), used by convolution grids and audits

def base_density(d: DistributionSpec, x: float) -> float:
    if d.family == "gaussian":
        return INV_SQRT_2PI * math.exp(-0.5 * x * x)
    if d.family == "uniform_sym":
        return 1.0 / (2.0 * SQRT3) if abs(x) <= SQRT3 else 0.0
    if d.family == "exp_centered":
        return math.exp(-(x + 1.0)) if x >= -1.0 else 0.0
    xs, ps = d.params["xs"], d.params["ps"]
    return float(np.interp(x, xs, ps, left=0.0, right=0.0))


def support(d: DistributionSpec) -> tuple[float, float]:
    """Support endpoints, possibly infinite."""
    if d.family == "gaussian":
        return (-math.inf, math.inf)
    if d.family == "uniform_sym":
        return (-SQRT3, SQRT3)
    if d.family == "exp_centered":
        return (-1.0, math.inf)
    xs = d.params["xs"]
    return (float(xs[0]), float(xs[-1]))
