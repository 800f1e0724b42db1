"""Pure-numpy reference implementations of the hot kernels.

Selected at import time by :mod:`splinecoarsen.kernels` when numba is
unavailable or disabled via ``SPLINECOARSEN_NO_NUMBA``.
"""

import numpy as np


def basis_values_many(knots, degree, xs):
    """Evaluate the ``degree+1`` active B-splines at every point of `xs`.

    Returns ``(first_active, values)`` where ``values[g, s]`` is the value of
    basis function ``first_active[g] + s`` at ``xs[g]``.
    """
    p = degree
    n = len(knots) - p - 1
    xs = np.asarray(xs, dtype=np.float64)
    m = xs.shape[0]
    mu = np.clip(np.searchsorted(knots, xs, side="right") - 1, p, n - 1)
    vals = np.zeros((m, p + 1))
    vals[:, 0] = 1.0
    left = np.empty((m, p + 1))
    right = np.empty((m, p + 1))
    for k in range(1, p + 1):
        left[:, k] = xs - knots[mu + 1 - k]
        right[:, k] = knots[mu + k] - xs
        saved = np.zeros(m)
        for s in range(k):
            den = right[:, s + 1] + left[:, k - s]
            factor = np.where(den > 0, vals[:, s] / np.where(den > 0, den, 1.0), 0.0)
            vals[:, s] = saved + right[:, s + 1] * factor
            saved = left[:, k - s] * factor
        vals[:, k] = saved
    return mu - p, vals


def eval_grid_2d(fa_x, vals_x, fa_y, vals_y, coeffs):
    """Tensor-product spline values on the product grid of two point sets.

    Implemented with dense collocation matrices and two matrix products;
    the numba backend uses the banded structure directly.
    """
    mx, px1 = vals_x.shape
    my, py1 = vals_y.shape
    nx, ny = coeffs.shape
    Ex = np.zeros((mx, nx))
    rows = np.arange(mx)
    for s in range(px1):
        Ex[rows, fa_x + s] = vals_x[:, s]
    Ey = np.zeros((my, ny))
    rows = np.arange(my)
    for s in range(py1):
        Ey[rows, fa_y + s] = vals_y[:, s]
    return Ex @ coeffs @ Ey.T


def banded_rows_apply(offsets, widths, data, x):
    """Multiply a row-banded matrix by dense columns.

    Row ``i`` has ``widths[i]`` nonzeros ``data[i, :widths[i]]`` starting at
    column ``offsets[i]``.  `x` has shape ``(n_cols, m)``.
    """
    n_rows = offsets.shape[0]
    out = np.empty((n_rows, x.shape[1]))
    for i in range(n_rows):
        o, w = offsets[i], widths[i]
        out[i] = data[i, :w] @ x[o:o + w]
    return out
