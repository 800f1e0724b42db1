"""Banded left inverses of subdivision matrices via local least squares.

A left inverse ``B`` (``B A = I``) maps fine B-spline coefficients back to the
coarse space while reproducing every coarse spline exactly.  Each row of ``B``
is a row of the Moore-Penrose pseudoinverse of one of three small submatrices
of ``A``:

* ``A_tl`` (``t x l``, top-left corner) yields the first ``ell`` rows,
* ``A_in`` (``r x q``, interior window) yields the shared interior stencil
  ``omega`` -- the minimum-norm solution of ``A_in^T x = e_center`` -- placed
  with a stride of two columns per row,
* ``A_br`` (``t x l``, bottom-right corner) yields the last ``ell`` rows.

``r`` is the locality width: the number of entries allowed to be nonzero in
each interior row.  Admissible widths are ``r = p + 2 + 2k`` with
``0 <= k <= p + 2``.  For degrees up to 4 the block dimensions come from a
validated table; for higher degrees they are derived by a search over window
positions (:func:`derive_parameters`) and certified by a ``B A = I`` probe.
"""

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import comb

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (
    DimensionMismatchError,
    NoValidConfigurationError,
    RankDeficientError,
    TooSmallSpaceError,
    UnsupportedWidthError,
)
from .splines import SplineSpace
from .subdivision import SubdivisionMatrix, build_subdivision_matrix, eta_vector

#: absolute threshold below which an assembled entry counts as a structural zero
NONZERO_TOL = 1e-13


@dataclass(frozen=True)
class LocalityParameters:
    """Dimensions of the three local blocks for one ``(p, r)`` configuration.

    ``A_in`` is ``r x q``, the corner blocks are ``t x l``, ``ell`` is the
    number of boundary rows taken from each corner pseudoinverse, and ``z``
    is the number of leading zero columns before the first interior stencil.
    They satisfy ``r = 4*ell + 2 - p - 2*z``.
    """

    p: int
    r: int
    k: int
    q: int
    t: int
    l: int
    ell: int
    z: int


def _params(p, r, q, t, l, ell, z):
    return LocalityParameters(p=p, r=r, k=(r - p - 2) // 2, q=q, t=t, l=l, ell=ell, z=z)


#: validated block dimensions for degrees 1..4, keyed by (p, r)
PARAMETER_TABLE = {
    (1, 3): _params(1, 3, 3, 2, 2, 1, 1),
    (1, 5): _params(1, 5, 3, 2, 2, 1, 0),
    (1, 7): _params(1, 7, 5, 4, 3, 2, 1),
    (1, 9): _params(1, 9, 5, 4, 3, 2, 0),
    (2, 4): _params(2, 4, 3, 4, 3, 2, 2),
    (2, 6): _params(2, 6, 5, 6, 4, 3, 3),
    (2, 8): _params(2, 8, 5, 6, 4, 3, 2),
    (2, 10): _params(2, 10, 7, 8, 5, 4, 3),
    (2, 12): _params(2, 12, 7, 8, 5, 4, 2),
    (3, 5): _params(3, 5, 5, 8, 6, 4, 5),
    (3, 7): _params(3, 7, 5, 8, 6, 4, 4),
    (3, 9): _params(3, 9, 7, 10, 7, 5, 5),
    (3, 11): _params(3, 11, 7, 10, 7, 5, 4),
    (3, 13): _params(3, 13, 9, 12, 8, 6, 5),
    (3, 15): _params(3, 15, 9, 12, 8, 6, 4),
    (4, 6): _params(4, 6, 5, 10, 7, 5, 6),
    (4, 8): _params(4, 8, 7, 12, 8, 6, 7),
    (4, 10): _params(4, 10, 7, 12, 8, 6, 6),
    (4, 12): _params(4, 12, 9, 14, 9, 7, 7),
    (4, 14): _params(4, 14, 9, 14, 9, 7, 6),
    (4, 16): _params(4, 16, 11, 16, 10, 8, 7),
    (4, 18): _params(4, 18, 11, 16, 10, 8, 6),
}

TABULATED_WIDTHS = {
    p: sorted(r for (pp, r) in PARAMETER_TABLE if pp == p) for p in (1, 2, 3, 4)
}


def _width_index(p: int, r: int) -> int:
    """k such that r = p + 2 + 2k, validating the admissible range."""
    k, rem = divmod(r - p - 2, 2)
    if rem != 0 or k < 0 or k > p + 2:
        raise UnsupportedWidthError(
            f"locality width {r} is not of the form p+2+2k with 0<=k<=p+2 for p={p}")
    return k


def interior_column_count(p: int, r: int) -> int:
    """Number of columns q of the interior window ``A_in``; always odd."""
    k = _width_index(p, r)
    if p % 2 == 1:
        return (p + 2) + 2 * (k // 2)
    return (p + 1) + 2 * ((k + 1) // 2)


def lookup_parameters(p: int, r: int, derive_fallback: bool = True) -> LocalityParameters:
    """Block dimensions for ``(p, r)``: tabulated for ``p <= 4``, derived otherwise."""
    key = (int(p), int(r))
    if key in PARAMETER_TABLE:
        return PARAMETER_TABLE[key]
    if not derive_fallback:
        raise UnsupportedWidthError(f"(p={p}, r={r}) is not tabulated and derivation is disabled")
    return derive_parameters(p, r)


def build_A_in(p: int, params: LocalityParameters) -> np.ndarray:
    """Interior window of ``A``: ``r`` rows, ``q`` columns, stencil stride 2.

    The central column carries the full two-scale stencil centered in the
    window; neighbouring columns are shifted by two rows and clipped.
    """
    r, q, k = params.r, params.q, params.k
    e = eta_vector(p)
    mid = (q - 1) // 2
    M = np.zeros((r, q))
    for c in range(q):
        start = k + 2 * (c - mid)
        for i in range(p + 2):
            row = start + i
            if 0 <= row < r:
                M[row, c] = e[i]
    if np.linalg.matrix_rank(M) < q:
        raise RankDeficientError(f"A_in for (p={p}, r={r}) is not full column rank")
    return M


def build_corner_blocks(A: SubdivisionMatrix, params: LocalityParameters):
    """Extract ``A_tl = A[:t, :l]`` and ``A_br = A[-t:, -l:]``, checking rank."""
    t, l, ell, z = params.t, params.l, params.ell, params.z
    n, nhat = A.shape
    if nhat < 2 * ell + 1:
        raise TooSmallSpaceError(
            f"coarse dimension {nhat} < {2 * ell + 1} required for width {params.r}")
    if n < t + z:
        raise TooSmallSpaceError(f"fine dimension {n} < t + z = {t + z}")
    dense = A.toarray()
    A_tl = dense[:t, :l].copy()
    A_br = dense[n - t:, nhat - l:].copy()
    for name, block in (("A_tl", A_tl), ("A_br", A_br)):
        if np.linalg.matrix_rank(block) < l:
            raise RankDeficientError(f"{name} for (p={params.p}, r={params.r}) is rank deficient")
    return A_tl, A_br


def _pinv_rows(block: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a full-column-rank block.

    Column-pivoted orthogonal factorization via LAPACK gelsy; the blocks are
    at most 16 x 11, so this is exact to machine precision.
    """
    sol, *_ = scipy.linalg.lstsq(block, np.eye(block.shape[0]), lapack_driver="gelsy")
    return sol


def compute_omega(p: int, r: int, params: LocalityParameters | None = None) -> np.ndarray:
    """Shared interior stencil: the central row of ``pinv(A_in)``.

    This is the minimum-Euclidean-norm solution of ``A_in^T x = e_center``
    (the central index is well defined because ``q`` is odd).
    """
    params = params or lookup_parameters(p, r)
    A_in = build_A_in(p, params)
    B_in = _pinv_rows(A_in)
    return B_in[(params.q - 1) // 2]


# ---------------------------------------------------------------------------
# exact rational path


def _eta_exact(p):
    return [Fraction(comb(p + 1, i), 2 ** p) for i in range(p + 2)]


def _solve_exact(M, rhs):
    """Gaussian elimination with exact Fraction arithmetic."""
    n = len(M)
    aug = [list(M[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            raise RankDeficientError("exact system is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def compute_omega_exact(p: int, r: int, params: LocalityParameters | None = None) -> list[Fraction]:
    """The interior stencil over exact rational arithmetic.

    Solves the normal equations of the interior window with Fractions, so the
    result is the stencil's exact rational value (used to verify the float
    path and to print exact fractions).
    """
    params = params or lookup_parameters(p, r)
    r_, q = params.r, params.q
    e = _eta_exact(p)
    mid = (q - 1) // 2
    A_in = [[Fraction(0)] * q for _ in range(r_)]
    for c in range(q):
        start = params.k + 2 * (c - mid)
        for i in range(p + 2):
            row = start + i
            if 0 <= row < r_:
                A_in[row][c] = e[i]
    M = [[sum(A_in[i][a] * A_in[i][b] for i in range(r_)) for b in range(q)] for a in range(q)]
    rhs = [Fraction(int(a == mid)) for a in range(q)]
    y = _solve_exact(M, rhs)
    return [sum(A_in[i][c] * y[c] for c in range(q)) for i in range(r_)]


# ---------------------------------------------------------------------------
# operator assembly


class CoarseningOperator:
    """Assembled banded left inverse ``B`` of a subdivision matrix.

    Rows ``0..ell-1`` hold the top corner block over columns ``0..t-1``; the
    interior row ``j`` holds `omega` over columns ``z + 2*(j - ell)`` onward;
    the last ``ell`` rows hold the bottom corner block.  Immutable and safe
    for concurrent application.
    """

    def __init__(self, params: LocalityParameters, n_hat: int, n: int,
                 B_tl: np.ndarray, B_br: np.ndarray, omega: np.ndarray):
        self.params = params
        self.n_hat = n_hat
        self.n = n
        self.B_tl = B_tl
        self.B_br = B_br
        self.omega = omega
        ell, t, z, r = params.ell, params.t, params.z, params.r
        offsets = np.empty(n_hat, dtype=np.int64)
        widths = np.empty(n_hat, dtype=np.int64)
        wmax = max(t, r)
        data = np.zeros((n_hat, wmax))
        for j in range(ell):
            offsets[j], widths[j] = 0, t
            data[j, :t] = B_tl[j]
        for j in range(ell, n_hat - ell):
            offsets[j], widths[j] = z + 2 * (j - ell), r
            data[j, :r] = omega
        for j in range(n_hat - ell, n_hat):
            offsets[j], widths[j] = n - t, t
            data[j, :t] = B_br[j - (n_hat - ell)]
        self._offsets, self._widths, self._data = offsets, widths, data

    @property
    def shape(self):
        return (self.n_hat, self.n)

    def row_structure(self):
        return self._offsets, self._widths, self._data

    def toarray(self) -> np.ndarray:
        B = np.zeros(self.shape)
        for j in range(self.n_hat):
            o, w = self._offsets[j], self._widths[j]
            B[j, o:o + w] = self._data[j, :w]
        return B

    def apply(self, c: np.ndarray) -> np.ndarray:
        """Banded product ``B @ c`` for a vector or stacked columns."""
        c = np.asarray(c, dtype=float)
        if c.shape[0] != self.n:
            raise DimensionMismatchError(f"expected {self.n} fine coefficients, got {c.shape[0]}")
        x = c[:, None] if c.ndim == 1 else c
        out = kernels.banded_rows_apply(self._offsets, self._widths, self._data,
                                        np.ascontiguousarray(x))
        return out[:, 0] if c.ndim == 1 else out

    def ancestor_counts(self) -> np.ndarray:
        """Number of coarse functions each fine function contributes to.

        Counts the entries of each column of ``B`` larger than
        ``NONZERO_TOL`` in magnitude.
        """
        return (np.abs(self.toarray()) > NONZERO_TOL).sum(axis=0)

    def to_json(self) -> str:
        payload = {
            "p": self.params.p,
            "r": self.params.r,
            "params": asdict(self.params),
            "omega": self.omega.tolist(),
            "B_tl": self.B_tl.tolist(),
            "B_br": self.B_br.tolist(),
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str, n_hat: int) -> "CoarseningOperator":
        """Rebuild the operator for a coarse space of dimension `n_hat`."""
        d = json.loads(text)
        params = LocalityParameters(**d["params"])
        if n_hat < 2 * params.ell + 1:
            raise TooSmallSpaceError(
                f"coarse dimension {n_hat} < {2 * params.ell + 1} required for width {params.r}")
        n = 2 * n_hat - params.p
        return cls(params, n_hat, n,
                   np.asarray(d["B_tl"], dtype=float),
                   np.asarray(d["B_br"], dtype=float),
                   np.asarray(d["omega"], dtype=float))


def assemble_left_inverse(A: SubdivisionMatrix, params: LocalityParameters) -> CoarseningOperator:
    """Assemble the block left inverse of `A` for the given parameters."""
    n, nhat = A.shape
    A_tl, A_br = build_corner_blocks(A, params)
    B_tl = _pinv_rows(A_tl)[:params.ell]
    B_br = _pinv_rows(A_br)[-params.ell:]
    omega = compute_omega(params.p, params.r, params)
    return CoarseningOperator(params, nhat, n, B_tl, B_br, omega)


def build_left_inverse(p: int, r: int, num_breakpoints: int,
                       params: LocalityParameters | None = None):
    """Convenience: subdivision matrix and its left inverse on ``[0, 1]``.

    Returns ``(A, B)`` for the coarse space with `num_breakpoints`
    breakpoints.  Both matrices are scale invariant, so the unit interval
    loses no generality.
    """
    coarse = SplineSpace.uniform(0.0, 1.0, num_breakpoints, p)
    A = build_subdivision_matrix(coarse, coarse.refine())
    params = params or lookup_parameters(p, r)
    return A, assemble_left_inverse(A, params)


def apply_coarsening(op: CoarseningOperator, c) -> np.ndarray:
    """Coarse coefficients ``B @ c`` of the fine coefficient vector `c`."""
    return op.apply(c)


def ancestor_counts(op: CoarseningOperator) -> np.ndarray:
    return op.ancestor_counts()


# ---------------------------------------------------------------------------
# parameter derivation for arbitrary degree


def derive_parameters(p: int, r: int) -> LocalityParameters:
    """Find block dimensions by searching window positions in a probe matrix.

    Chooses the smallest ``ell`` whose interior window (placed per the
    stride-2 layout, with ``z`` fixed by ``r = 4*ell + 2 - p - 2*z``) matches
    the probe subdivision matrix exactly, then takes ``t = 2*ell`` rows for
    the corner blocks and keeps every column supported on those rows.  The
    result is certified by a ``B A = I`` check on the probe and reproduces
    the tabulated dimensions for ``p <= 4``.
    """
    p, r = int(p), int(r)
    k = _width_index(p, r)
    q = interior_column_count(p, r)
    params0 = _params(p, r, q, 0, 0, 0, 0)
    A_in = build_A_in(p, params0)

    probe_N = 4 * p + 2 * k + 16
    coarse = SplineSpace.uniform(0.0, 1.0, probe_N, p)
    A = build_subdivision_matrix(coarse, coarse.refine())
    dense = A.toarray()
    n, nhat = A.shape
    half = (q - 1) // 2

    ell_min = max(half, ((p + r) // 2 - 1 + 1) // 2)
    for ell in range(ell_min, ell_min + 3 * p + 9):
        z = 2 * ell + 1 - (p + r) // 2
        if z < 0:
            continue
        j = ell  # first interior column, 0-based
        c0, c1 = j - half, j + half
        if c0 < 0 or c1 >= nhat or z + r > n:
            continue
        window = dense[z:z + r, :]
        if not np.allclose(window[:, c0:c1 + 1], A_in, atol=1e-12):
            continue
        outside = np.ones(nhat, dtype=bool)
        outside[c0:c1 + 1] = False
        if np.abs(window[:, outside]).max() > 1e-12:
            continue
        t = 2 * ell
        supported = np.nonzero(np.abs(dense[:t, :]).max(axis=0) > 1e-12)[0]
        l = int(supported[-1]) + 1
        if l > t or np.linalg.matrix_rank(dense[:t, :l]) < l:
            continue
        cand = _params(p, r, q, t, l, ell, z)
        B = assemble_left_inverse(A, cand)
        if np.abs(B.toarray() @ dense - np.eye(nhat)).max() <= 1e-10:
            return cand
    raise NoValidConfigurationError(f"no valid block configuration found for (p={p}, r={r})")
