"""Subdivision (uniform knot-insertion) matrices between nested spline spaces.

The matrix ``A`` maps coarse B-spline coefficients to the coefficients of the
same spline in the dyadically refined space, ``c = A chat``.  Away from the
boundary every column carries the same ``p+2`` weights (the two-scale stencil
of :func:`eta_vector`) shifted down by two rows per column; the first and last
``p`` columns are boundary-modified.

Columns are assembled by the discrete-B-spline (Oslo-type) knot-insertion
recursion, which produces the boundary columns and the interior stencil in one
sweep and works for any degree.
"""

from math import comb

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, MismatchedSpacesError, TooSmallSpaceError
from .splines import SplineSpace, dyadic_refine


def eta_vector(p: int) -> np.ndarray:
    """Two-scale stencil of a uniform degree-``p`` B-spline.

    Entry ``i`` (0-based) equals ``2**-p * C(p+1, i)``; the vector is
    symmetric, has ``p+2`` entries and sums to 2.
    """
    if p < 1:
        raise ValueError(f"degree must be >= 1, got {p}")
    return np.array([comb(p + 1, i) for i in range(p + 2)], dtype=float) / 2.0 ** p


class SubdivisionMatrix:
    """Banded ``n x nhat`` subdivision matrix in per-column storage.

    Column ``j`` holds ``col_widths[j]`` contiguous nonzeros starting at row
    ``first_rows[j]``; every column has at most ``p+2`` nonzeros.  Instances
    are immutable; concurrent `apply` calls are safe.
    """

    def __init__(self, degree, n_rows, n_cols, first_rows, col_data, col_widths):
        self.degree = degree
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.first_rows = first_rows
        self.col_data = col_data
        self.col_widths = col_widths
        self._row_form = None

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def column(self, j):
        """``(first_row, values)`` of the contiguous nonzero run of column `j`."""
        return int(self.first_rows[j]), self.col_data[j, :self.col_widths[j]].copy()

    def toarray(self) -> np.ndarray:
        A = np.zeros(self.shape)
        for j in range(self.n_cols):
            f, w = self.first_rows[j], self.col_widths[j]
            A[f:f + w, j] = self.col_data[j, :w]
        return A

    def rows(self):
        """Row-banded view ``(offsets, widths, data)`` used by the apply kernels."""
        if self._row_form is None:
            A = self.toarray()
            offsets = np.zeros(self.n_rows, dtype=np.int64)
            widths = np.zeros(self.n_rows, dtype=np.int64)
            for i in range(self.n_rows):
                nz = np.nonzero(A[i])[0]
                offsets[i] = nz[0]
                widths[i] = nz[-1] - nz[0] + 1
            wmax = int(widths.max())
            data = np.zeros((self.n_rows, wmax))
            for i in range(self.n_rows):
                data[i, :widths[i]] = A[i, offsets[i]:offsets[i] + widths[i]]
            self._row_form = (offsets, widths, data)
        return self._row_form

    def apply(self, chat: np.ndarray) -> np.ndarray:
        """Banded product ``A @ chat`` for a coefficient vector or stacked columns."""
        chat = np.asarray(chat, dtype=float)
        if chat.shape[0] != self.n_cols:
            raise DimensionMismatchError(
                f"expected {self.n_cols} coarse coefficients, got {chat.shape[0]}")
        offsets, widths, data = self.rows()
        x = chat[:, None] if chat.ndim == 1 else chat
        out = kernels.banded_rows_apply(offsets, widths, data, np.ascontiguousarray(x))
        return out[:, 0] if chat.ndim == 1 else out

    def apply_transpose(self, c: np.ndarray) -> np.ndarray:
        """Banded product ``A.T @ c``; the column storage is already row-banded for it."""
        c = np.asarray(c, dtype=float)
        if c.shape[0] != self.n_rows:
            raise DimensionMismatchError(
                f"expected {self.n_rows} fine coefficients, got {c.shape[0]}")
        x = c[:, None] if c.ndim == 1 else c
        out = kernels.banded_rows_apply(self.first_rows, self.col_widths, self.col_data,
                                        np.ascontiguousarray(x))
        return out[:, 0] if c.ndim == 1 else out


def _oslo_row(tau, p, mu, t, i):
    """Discrete B-spline values alpha_{j,p}(i) for j in [mu-p, mu] (0-based)."""
    row = np.zeros(p + 1)
    row[0] = 1.0
    for k in range(1, p + 1):
        x = t[i + k]
        new = np.zeros(k + 1)
        for s in range(k + 1):
            j = mu - k + s
            if s >= 1:
                den = tau[j + k] - tau[j]
                if den > 0.0:
                    new[s] += (x - tau[j]) / den * row[s - 1]
            if s <= k - 1:
                den = tau[j + 1 + k] - tau[j + 1]
                if den > 0.0:
                    new[s] += (tau[j + 1 + k] - x) / den * row[s]
        row = new
    return row


def build_subdivision_matrix(coarse: SplineSpace, fine: SplineSpace) -> SubdivisionMatrix:
    """Assemble ``A`` with ``beta_hat_j = sum_i A[i, j] beta_i``.

    `fine` must be the dyadic refinement of `coarse`.  Requires at least
    ``p + 2`` coarse breakpoints so that full interior columns exist.
    """
    p = coarse.degree
    if fine.degree != p or dyadic_refine(coarse.knots) != fine.knots:
        raise MismatchedSpacesError(
            "fine space is not the dyadic refinement of the coarse space")
    if coarse.knots.num_breakpoints < p + 2:
        raise TooSmallSpaceError(
            f"need at least {p + 2} coarse breakpoints, got {coarse.knots.num_breakpoints}")

    tau = coarse.knot_array
    t = fine.knot_array
    nhat, n = coarse.dim, fine.dim

    spans = np.clip(np.searchsorted(tau, t[:n], side="right") - 1, p, nhat - 1)
    oslo_rows = [_oslo_row(tau, p, int(spans[i]), t, i) for i in range(n)]

    first_rows = np.full(nhat, n, dtype=np.int64)
    last_rows = np.full(nhat, -1, dtype=np.int64)
    for i in range(n):
        for s in range(p + 1):
            j = int(spans[i]) - p + s
            if 0 <= j < nhat and oslo_rows[i][s] != 0.0:
                first_rows[j] = min(first_rows[j], i)
                last_rows[j] = max(last_rows[j], i)

    col_data = np.zeros((nhat, p + 2))
    col_widths = (last_rows - first_rows + 1).astype(np.int64)
    for i in range(n):
        for s in range(p + 1):
            j = int(spans[i]) - p + s
            if 0 <= j < nhat and oslo_rows[i][s] != 0.0:
                col_data[j, i - first_rows[j]] = oslo_rows[i][s]
    return SubdivisionMatrix(p, n, nhat, first_rows, col_data, col_widths)


def apply_subdivision(A: SubdivisionMatrix, chat) -> np.ndarray:
    """Fine coefficients ``A @ chat`` of the coarse spline with coefficients `chat`."""
    return A.apply(chat)
