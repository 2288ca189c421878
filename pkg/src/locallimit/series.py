"""Truncated formal power series algebra on real coefficients.

Everything downstream of the cumulants runs through this module: the
saddle-point series z0(tau) obtained by reverting K', the Cramer series
lambda(tau) and the half-log correction series mu(tau).  Coefficient
``k`` of a series is the coefficient of tau**k; binary operations
truncate at the smaller operand order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "DEFAULT_ORDER",
    "PowerSeries",
    "CumulantVector",
    "ps_arith",
    "ps_funcs",
    "revert",
    "saddle_point_series",
    "cramer_series",
    "mu_series",
]

DEFAULT_ORDER = 12

# Tolerance declaring a cumulant non-zero (grid quadrature noise floor).
CUMULANT_TOL = 1e-9


@dataclass(frozen=True)
class PowerSeries:
    """Power series sum_k coeffs[k] * tau**k, truncated after coeffs[-1]."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        cs = tuple(float(c) for c in coeffs)
        if not cs:
            raise ValueError("a power series needs at least a constant term")
        object.__setattr__(self, "coeffs", cs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> float:
        return self.coeffs[k] if 0 <= k <= self.order else 0.0

    def truncate(self, order: int) -> "PowerSeries":
        if order >= self.order:
            return self.pad(order)
        return PowerSeries(self.coeffs[: order + 1])

    def pad(self, order: int) -> "PowerSeries":
        if order <= self.order:
            return self
        return PowerSeries(self.coeffs + (0.0,) * (order - self.order))

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(tuple(self[k] + other[k] for k in range(n + 1)))

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(tuple(self[k] - other[k] for k in range(n + 1)))

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(tuple(-c for c in self.coeffs))

    def scale(self, s: float) -> "PowerSeries":
        return PowerSeries(tuple(s * c for c in self.coeffs))

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(_mul(self.coeffs, other.coeffs, n))

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """self(inner(tau)); inner must have zero constant term."""
        if inner[0] != 0.0:
            raise ValueError("composition requires zero constant term in the inner series")
        n = min(self.order, inner.order)
        return PowerSeries(_compose(self.coeffs, inner.coeffs, n))

    def deriv(self) -> "PowerSeries":
        if self.order == 0:
            return PowerSeries((0.0,))
        return PowerSeries(tuple(k * self.coeffs[k] for k in range(1, self.order + 1)))

    def shift_up(self) -> "PowerSeries":
        """Multiply by tau, keeping one more coefficient."""
        return PowerSeries((0.0,) + self.coeffs)

    def log(self) -> "PowerSeries":
        if self.coeffs[0] != 1.0:
            raise ValueError("log requires constant term 1")
        return PowerSeries(_log(self.coeffs, self.order))

    def exp(self) -> "PowerSeries":
        if self.coeffs[0] != 0.0:
            raise ValueError("exp requires constant term 0")
        return PowerSeries(_exp(self.coeffs, self.order))

    def __call__(self, tau: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * tau + c
        return acc


def _mul(a: Sequence[float], b: Sequence[float], n: int) -> tuple[float, ...]:
    out = [0.0] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if ai == 0.0:
            continue
        for j in range(n + 1 - i):
            out[i + j] += ai * b[j] if j < len(b) else 0.0
    return tuple(out)


def _compose(a: Sequence[float], b: Sequence[float], n: int) -> tuple[float, ...]:
    # Horner's scheme over fixed-length coefficient arrays.
    out = [0.0] * (n + 1)
    for ak in reversed(a):
        out = list(_mul(out, b, n))
        out[0] += ak
    return tuple(out)


def _log(a: Sequence[float], n: int) -> tuple[float, ...]:
    # l' * a = a' solved coefficientwise, a[0] = 1.
    out = [0.0] * (n + 1)
    for k in range(1, n + 1):
        s = k * (a[k] if k < len(a) else 0.0)
        for j in range(1, k):
            s -= j * out[j] * (a[k - j] if k - j < len(a) else 0.0)
        out[k] = s / k
    return tuple(out)


def _exp(a: Sequence[float], n: int) -> tuple[float, ...]:
    out = [0.0] * (n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        s = 0.0
        for j in range(1, k + 1):
            aj = a[j] if j < len(a) else 0.0
            s += j * aj * out[k - j]
        out[k] = s / k
    return tuple(out)


def _div(a: Sequence[float], b: Sequence[float], n: int) -> tuple[float, ...]:
    if b[0] == 0.0:
        raise ZeroDivisionError("series division by zero constant term")
    out = [0.0] * (n + 1)
    for k in range(n + 1):
        s = a[k] if k < len(a) else 0.0
        for j in range(k):
            s -= out[j] * (b[k - j] if k - j < len(b) else 0.0)
        out[k] = s / b[0]
    return tuple(out)


def ps_arith(a: PowerSeries, b: PowerSeries, op: str) -> PowerSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "compose":
        return a.compose(b)
    raise ValueError(f"unknown series operation {op!r}")


def ps_funcs(a: PowerSeries, f: str) -> PowerSeries:
    if f == "log":
        return a.log()
    if f == "exp":
        return a.exp()
    raise ValueError(f"unknown series function {f!r}")


def revert(a: PowerSeries) -> PowerSeries:
    """Compositional inverse: b with a(b(tau)) = tau through the truncation order.

    Newton iteration on series; quadratic convergence reaches the full
    order in O(log order) passes.
    """
    if a[0] != 0.0:
        raise ValueError("reversion requires zero constant term")
    if a[1] == 0.0:
        raise ValueError("reversion requires a nonzero linear coefficient")
    n = a.order
    ident = [0.0] * (n + 1)
    if n >= 1:
        ident[1] = 1.0
    ap = a.deriv().pad(n).coeffs
    b = [0.0] * (n + 1)
    b[1] = 1.0 / a[1]
    steps = max(1, math.ceil(math.log2(n + 1))) + 1
    for _ in range(steps):
        res = list(_compose(a.pad(n).coeffs, b, n))
        for k in range(n + 1):
            res[k] -= ident[k]
        slope = _compose(ap, b, n)
        delta = _div(res, slope, n)
        b = [bk - dk for bk, dk in zip(b, delta)]
    return PowerSeries(b)


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants gamma_k indexed by k (gammas[0] = gammas[1] = 0, gammas[2] = 1).

    ``m`` is the first index >= 3 with a non-zero cumulant (None for the
    normal law), ``gamma_m`` its value.
    """

    gammas: tuple[float, ...]
    m: int | None
    gamma_m: float | None

    def __post_init__(self):
        g = self.gammas
        if len(g) < 3 or abs(g[2] - 1.0) > 1e-7 or abs(g[0]) > 1e-12 or abs(g[1]) > 1e-9:
            raise ValueError("cumulant vector must describe a mean-0 variance-1 law")
        if self.m is not None:
            if not (3 <= self.m <= self.max_order):
                raise ValueError("m out of range")
            for j in range(3, self.m):
                if abs(g[j]) > CUMULANT_TOL:
                    raise ValueError("gamma_j must vanish below the first non-zero cumulant")

    @classmethod
    def from_gammas(cls, gammas: Iterable[float], tol: float = CUMULANT_TOL) -> "CumulantVector":
        g = tuple(float(x) for x in gammas)
        m = None
        gamma_m = None
        for k in range(3, len(g)):
            if abs(g[k]) > tol:
                m, gamma_m = k, g[k]
                break
        return cls(g, m, gamma_m)

    @property
    def max_order(self) -> int:
        return len(self.gammas) - 1

    def gamma(self, k: int) -> float:
        return self.gammas[k] if k <= self.max_order else 0.0


def _require_order(c: CumulantVector, needed: int, what: str) -> None:
    if c.max_order < needed:
        raise ValueError(
            f"{what} needs cumulants through order {needed}, got {c.max_order}"
        )


def cgf_series(c: CumulantVector, order: int) -> PowerSeries:
    """K(z) = z^2/2 + sum_{k>=3} gamma_k z^k / k! as a series in z."""
    _require_order(c, order, "cgf_series")
    coeffs = [0.0] * (order + 1)
    for k in range(2, order + 1):
        coeffs[k] = c.gamma(k) / math.factorial(k)
    return PowerSeries(coeffs)


def saddle_point_series(c: CumulantVector, order: int) -> PowerSeries:
    """z0(tau) with K'(z0(tau)) = tau, by reversion of the K' series."""
    _require_order(c, order + 1, "saddle_point_series")
    kp = cgf_series(c, order + 1).deriv()
    return revert(kp)


def cramer_series(c: CumulantVector, order: int) -> PowerSeries:
    """lambda(tau) with tau^3 lambda(tau) = K(z0(tau)) - tau z0(tau) + tau^2/2.

    The numerator is built by explicit composition; its coefficients of
    orders 0..2 must cancel exactly and are asserted to, then the series
    is shifted down by three.
    """
    work = order + 3
    _require_order(c, work, "cramer_series")
    K = cgf_series(c, work)
    z0 = saddle_point_series(c, work - 1)
    # K has no constant or linear term, so padding z0 with a zero top
    # coefficient leaves the composition exact through order `work`.
    num = K.compose(z0.pad(work)) - z0.shift_up() + PowerSeries(
        (0.0, 0.0, 0.5) + (0.0,) * (work - 2)
    )
    scale = max(1.0, max(abs(x) for x in num.coeffs))
    for k in range(3):
        if abs(num[k]) > 1e-12 * scale:
            raise ArithmeticError(
                f"saddle numerator order-{k} coefficient failed to cancel: {num[k]!r}"
            )
    return PowerSeries(num.coeffs[3:])


def mu_series(c: CumulantVector, order: int) -> PowerSeries:
    """mu(tau) = (1/2) log K''(z0(tau)) as a series in tau."""
    _require_order(c, order + 3, "mu_series")
    kpp = cgf_series(c, order + 2).deriv().deriv()
    z0 = saddle_point_series(c, order + 2).truncate(order)
    comp = kpp.truncate(order).compose(z0)
    return comp.log().scale(0.5)
