"""Compiled inner loops. Scalar code only; callers do validation."""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def step(b, k, x):
    if x > 0.0:
        e = math.exp(-x)
        return b + x - k * e / (1.0 + e)
    return b + x - k / (1.0 + math.exp(x))


@njit(cache=True, nogil=True)
def slope(k, x):
    # f'(x) = 1 + k e^{-|x|} / (1 + e^{-|x|})^2
    e = math.exp(-abs(x))
    return 1.0 + k * e / ((1.0 + e) * (1.0 + e))


@njit(cache=True, nogil=True)
def iterate_tail(b, k, x0, n_transient, n_sample, bound):
    """Return (tail, n_recorded, escaped)."""
    x = x0
    tail = np.empty(n_sample)
    for _ in range(n_transient):
        x = step(b, k, x)
        if not (abs(x) <= bound):
            return tail[:0], 0, True
    for i in range(n_sample):
        tail[i] = x
        x = step(b, k, x)
        if not (abs(x) <= bound):
            return tail[: i + 1], i + 1, True
    return tail, n_sample, False


@njit(cache=True, nogil=True)
def iterate_many(b, k, seeds, n_steps, bound):
    """Advance every seed ``n_steps`` times; escaped seeds become nan."""
    out = seeds.copy()
    for j in range(out.shape[0]):
        x = out[j]
        for _ in range(n_steps):
            x = step(b, k, x)
            if not (abs(x) <= bound):
                x = np.nan
                break
        out[j] = x
    return out


@njit(cache=True, nogil=True)
def min_period(tail, atol, p_max):
    """Smallest p with max_i |tail[i+p] - tail[i]| < atol, or 0."""
    n = tail.shape[0]
    top = min(p_max, n - 1)
    for p in range(1, top + 1):
        ok = True
        for i in range(n - p):
            if abs(tail[i + p] - tail[i]) >= atol:
                ok = False
                break
        if ok:
            return p
    return 0


@njit(cache=True, nogil=True)
def lyapunov(k, xs):
    acc = 0.0
    for i in range(xs.shape[0]):
        acc += math.log(abs(slope(k, xs[i])))
    return acc / xs.shape[0]
