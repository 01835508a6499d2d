from __future__ import annotations

from typing import Callable

import numpy as np

from .core import QuadratureFailure

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(15)


def _panel(f: Callable[[float], float], a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * sum(w * f(mid + half * x) for x, w in zip(_NODES, _WEIGHTS))


def adaptive_gauss_legendre(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 30,
    noise_floor: float = 0.0,
) -> tuple[float, float]:
    """Adaptive composite 15-point Gauss-Legendre quadrature.

    A panel is accepted when its two halves agree with the whole panel to
    within the panel's share of ``tol``; otherwise both halves are refined.
    Returns ``(integral, error_estimate)``; the estimate is the summed
    whole-vs-halves discrepancy, which is pessimistic for smooth integrands
    because the halves are what get summed.

    ``noise_floor`` is the integrand's own noise level (absolute); panels
    whose discrepancy is below ``noise_floor * width`` are accepted too.
    """
    total = 0.0
    err = 0.0
    stack = [(a, b, _panel(f, a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        delta = abs(left + right - whole)
        if delta <= tol * (hi - lo) / (b - a) or delta <= noise_floor * (hi - lo):
            total += left + right
            err += delta
        elif depth >= max_depth:
            raise QuadratureFailure(f"refinement stalled on [{lo:.3g}, {hi:.3g}] with error {delta:.3e}")
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    return total, err
