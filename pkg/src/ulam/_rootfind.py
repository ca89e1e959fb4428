"""Guaranteed-bracketing bisection for monotone scalar functions."""

import numpy as np

ABS_TOL = 1e-15
MAX_ITER = 200


def bisect_monotone(f, y, lo, hi, increasing=True, tol=ABS_TOL, max_iter=MAX_ITER):
    """Solve ``f(x) = y`` for ``x`` in ``[lo, hi]`` by bisection.

    ``f`` must be monotone on ``[lo, hi]`` and vectorized over numpy arrays.
    ``y`` may be a scalar or an array; values outside ``[f(lo), f(hi)]`` are
    clamped to the nearer endpoint, so the result always lies in the bracket.
    Returns an array (or a float for scalar ``y``).
    """
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    a = np.full(y.shape, float(lo))
    b = np.full(y.shape, float(hi))
    for _ in range(max_iter):
        width = b - a
        active = width > tol
        if not active.any():
            break
        mid = a + 0.5 * width
        # stalled brackets (adjacent floats) are done
        active &= (mid > a) & (mid < b)
        if not active.any():
            break
        below = f(mid) < y if increasing else f(mid) > y
        a = np.where(active & below, mid, a)
        b = np.where(active & ~below, mid, b)
    x = a + 0.5 * (b - a)
    return float(x[0]) if scalar else x


def bisect_root(g, lo, hi, tol=ABS_TOL, max_iter=MAX_ITER):
    """Root of a scalar function with a sign change on ``[lo, hi]``."""
    g_lo = g(lo)
    if g_lo == 0.0:
        return float(lo)
    if g(hi) == 0.0:
        return float(hi)
    if np.sign(g_lo) == np.sign(g(hi)):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        mid = a + 0.5 * (b - a)
        if mid <= a or mid >= b:
            break
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if np.sign(g_mid) == np.sign(g_lo):
            a, g_lo = mid, g_mid
        else:
            b = mid
    return a + 0.5 * (b - a)
