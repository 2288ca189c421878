"""Small deterministic quadrature and maximization helpers.

Adaptive Simpson with the standard 15x Richardson acceptance test, a
panel-splitting wrapper for oscillatory integrands, and golden-section
refinement of a grid argmax.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

__all__ = ["adaptive_simpson", "integrate_panels", "golden_max"]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _simpson_step(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    # the textbook 15x allowance trusts the asymptotic error model too
    # much on peaked or oscillatory panels, so accept at 2x; the noise
    # term stops refinement once delta sits at the rounding floor of the
    # panel values, where tighter tolerances are unreachable anyway
    noise = 4e-16 * (abs(left) + abs(right) + abs(whole)) + 1e-300
    if depth <= 0 or abs(delta) <= max(2.0 * tol, noise):
        return left + right + delta / 15.0
    return _simpson_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) + \
        _simpson_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float, max_depth: int = 48) -> float:
    """Integral of f on [a, b] with absolute tolerance ~tol."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth)


def integrate_panels(f: Callable[[float], float], edges: Sequence[float], tol: float) -> float:
    """Adaptive Simpson on consecutive panels, tolerance shared equally."""
    n = len(edges) - 1
    if n < 1:
        return 0.0
    per = tol / n
    return math.fsum(adaptive_simpson(f, edges[i], edges[i + 1], per) for i in range(n))


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12) -> float:
    """Maximum value of a unimodal f on [a, b] by golden-section search."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return max(f1, f2)
