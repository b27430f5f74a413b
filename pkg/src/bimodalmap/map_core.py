"""
Evaluation of the bimodal map ``f(x) = b + x - k / (1 + e^x)``.

All functions accept scalars or numpy arrays for ``x``. The logistic factor
``1 / (1 + e^x)`` is evaluated through :func:`scipy.special.expit`, which is
finite for every finite argument, so ``evaluate`` never overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from ._config import TOL
from .exceptions import CriticalPointError, NoFixedPoint


@dataclass(frozen=True)
class MapParams:
    """Parameter pair ``(b, k)``. No domain restriction is applied here."""

    b: float
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.b) and math.isfinite(self.k)):
            raise ValueError(f"map parameters must be finite, got b={self.b}, k={self.k}")

    def __iter__(self):
        yield self.b
        yield self.k


@dataclass(frozen=True)
class CriticalStructure:
    """Turning points and fixed point of the map.

    ``x_max``/``x_min`` are ``None`` for ``k > -4`` and coincide at 0 for
    ``k == -4``; ``x_star`` is ``None`` when no fixed point exists.
    """

    x_max: Optional[float]
    x_min: Optional[float]
    x_star: Optional[float]
    exists_extrema: bool


def _logistic_slope(x):
    # e^x / (1 + e^x)^2, overflow-free
    return expit(x) * expit(-x)


def evaluate(p: MapParams, x):
    """Return ``f(x) = b + x - k / (1 + e^x)``."""
    return p.b + x - p.k * expit(-np.asarray(x, dtype=float))[()]


def derivative(p: MapParams, x, order: int = 1):
    """Closed-form derivative of order 1, 2 or 3 with respect to ``x``."""
    x = np.asarray(x, dtype=float)
    s1 = _logistic_slope(x)
    if order == 1:
        out = 1.0 + p.k * s1
    elif order == 2:
        out = p.k * s1 * (1.0 - 2.0 * expit(x))
    elif order == 3:
        out = p.k * s1 * (1.0 - 6.0 * s1)
    else:
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    return out[()]


def schwarzian(p: MapParams, x):
    """Schwarzian derivative ``f'''/f' - 3/2 (f''/f')^2`` in closed form.

    The closed form ``k e^x (2(e^x-1)^2 - (k+4) e^x) / (2((e^x+1)^2 + k e^x)^2)``
    is evaluated with numerator and denominator divided by ``(1+e^x)^4`` so it
    stays finite for large ``|x|``.

    Raises
    ------
    CriticalPointError
        If ``|f'(x)| < 1e-10`` anywhere in ``x``.
    """
    x = np.asarray(x, dtype=float)
    s1 = _logistic_slope(x)
    th2 = np.tanh(0.5 * x) ** 2          # (e^x - 1)^2 / (e^x + 1)^2
    fprime = 1.0 + p.k * s1              # ((e^x+1)^2 + k e^x) / (e^x+1)^2
    if np.any(np.abs(fprime) < TOL.critical_guard):
        raise CriticalPointError(f"|f'(x)| < {TOL.critical_guard} at b={p.b}, k={p.k}")
    num = p.k * s1 * (2.0 * th2 - (p.k + 4.0) * s1)
    return (num / (2.0 * fprime**2))[()]


def critical_points(p: MapParams) -> CriticalStructure:
    """Turning points ``x_max = -x_min`` and the fixed point ``x* = ln(k/b - 1)``.

    Raises
    ------
    NoFixedPoint
        If ``k/b - 1 <= 0`` (no fixed point exists).
    """
    b, k = p.b, p.k
    if b == 0.0 or k / b - 1.0 <= 0.0:
        raise NoFixedPoint(f"no fixed point for b={b}, k={k}")
    x_star = math.log(k / b - 1.0)
    x_max = x_min = None
    if k <= -4.0:
        disc = math.sqrt(max(k * k + 4.0 * k, 0.0))
        # e^{x_min} is the larger root of e^2 + (2+k) e + 1 = 0; the roots multiply to 1
        x_min = math.log(-1.0 - 0.5 * k + 0.5 * disc)
        x_max = -x_min
    return CriticalStructure(x_max=x_max, x_min=x_min, x_star=x_star, exists_extrema=k < -4.0)


def extrema(k: float) -> tuple[float, float]:
    """``(x_max, x_min)`` for ``k <= -4`` without requiring a fixed point."""
    if k > -4.0:
        raise ValueError(f"map is monotone for k > -4 (k={k})")
    disc = math.sqrt(max(k * k + 4.0 * k, 0.0))
    x_min = math.log(-1.0 - 0.5 * k + 0.5 * disc)
    return -x_min, x_min


def symmetry_conjugate(p: MapParams) -> MapParams:
    """Parameters ``(k - b, k)`` whose map is ``x -> -f(-x)``."""
    return MapParams(p.k - p.b, p.k)


def fixed_point_multiplier(p: MapParams) -> float:
    """``f'(x*)`` via the identity ``1 + e^{x*} = k/b``: equals ``1 + b(k-b)/k``."""
    return 1.0 + p.b * (p.k - p.b) / p.k
