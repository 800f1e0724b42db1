"""Numba-jitted hot kernels.

Same contracts as :mod:`splinecoarsen.kernels._numpy`; see there for the
parameter conventions. Compilation results are cached on disk.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def basis_values_many(knots, degree, xs):
    p = degree
    n = knots.shape[0] - p - 1
    m = xs.shape[0]
    first = np.empty(m, dtype=np.int64)
    vals = np.zeros((m, p + 1))
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    for g in range(m):
        x = xs[g]
        mu = np.searchsorted(knots, x, side="right") - 1
        if mu < p:
            mu = p
        if mu > n - 1:
            mu = n - 1
        first[g] = mu - p
        vals[g, 0] = 1.0
        for k in range(1, p + 1):
            left[k] = x - knots[mu + 1 - k]
            right[k] = knots[mu + k] - x
            saved = 0.0
            for s in range(k):
                den = right[s + 1] + left[k - s]
                factor = vals[g, s] / den if den > 0.0 else 0.0
                vals[g, s] = saved + right[s + 1] * factor
                saved = left[k - s] * factor
            vals[g, k] = saved
    return first, vals


@njit(cache=True)
def eval_grid_2d(fa_x, vals_x, fa_y, vals_y, coeffs):
    mx, px1 = vals_x.shape
    my, py1 = vals_y.shape
    out = np.empty((mx, my))
    for gx in range(mx):
        ix = fa_x[gx]
        for gy in range(my):
            iy = fa_y[gy]
            acc = 0.0
            for a in range(px1):
                cxa = vals_x[gx, a]
                if cxa != 0.0:
                    row = ix + a
                    for b in range(py1):
                        acc += cxa * vals_y[gy, b] * coeffs[row, iy + b]
            out[gx, gy] = acc
    return out


@njit(cache=True)
def banded_rows_apply(offsets, widths, data, x):
    n_rows = offsets.shape[0]
    m = x.shape[1]
    out = np.zeros((n_rows, m))
    for i in range(n_rows):
        o = offsets[i]
        w = widths[i]
        for s in range(w):
            v = data[i, s]
            if v != 0.0:
                for c in range(m):
                    out[i, c] += v * x[o + s, c]
    return out
