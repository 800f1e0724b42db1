"""Stability and accuracy diagnostics.

Norm reports reproduce the stability tables (``||B||_inf``, ``||omega||_2``,
``||I - AB||_2``, ``||I - AB||_inf``) for univariate and tensor-product
coarsening operators.  Gram (mass) matrices, global L2 projection of splines
and of arbitrary functions, and quadrature-based error norms support the
operator-vs-projection experiments.

Quadrature orders: ``p + 1`` Gauss points per element for Gram matrices
(exact for the degree-``2p`` integrand), ``p + 3`` for load vectors and error
integrals.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .errors import DimensionMismatchError
from .left_inverse import build_left_inverse, lookup_parameters
from .splines import SplineSpace, collocation_matrix, eval_basis_many, gauss_points
from .tensor import TensorSpace, _apply_mode, materialize_kronecker

#: dense-SVD fallback cap for the spectral norm (matrix entries)
SVD_FALLBACK_CAP = 4_000_000

#: default partition sizes for the norm tables; values saturate at these
#: sizes (the reports change by less than 5e-3 when the size is increased)
DEFAULT_BREAKPOINTS_1D = 50
DEFAULT_BREAKPOINTS_2D = 25


@dataclass(frozen=True)
class NormReport:
    """One row of a stability table."""

    p: int
    r: int
    n_hat: int
    norm_B_inf: float
    norm_omega_2: float
    norm_residual_2: float
    norm_residual_inf: float

    HEADERS = ("p", "r", "norm_B_inf", "norm_omega_2", "norm_I_AB_2", "norm_I_AB_inf")

    def as_row(self):
        return (self.p, self.r, self.norm_B_inf, self.norm_omega_2,
                self.norm_residual_2, self.norm_residual_inf)


def spectral_norm(M: np.ndarray, tol: float = 1e-8, maxit: int = 10000) -> float:
    """Largest singular value via power iteration on the normal operator.

    Deterministic (fixed seed); falls back to a dense SVD when the iteration
    has not converged and the matrix is small enough.
    """
    M = np.asarray(M)
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(maxit):
        w = M @ v
        z = M.T @ w
        lam = np.linalg.norm(z)
        if lam == 0.0:
            return 0.0
        v = z / lam
        if abs(lam - lam_prev) <= tol * lam:
            return float(np.sqrt(lam))
        lam_prev = lam
    if M.size <= SVD_FALLBACK_CAP:
        return float(np.linalg.svd(M, compute_uv=False)[0])
    return float(np.sqrt(lam_prev))


def norm_report(p: int, r: int, num_breakpoints: int = DEFAULT_BREAKPOINTS_1D) -> NormReport:
    """Univariate stability report for the ``(p, r)`` coarsening operator."""
    A, B = build_left_inverse(p, r, num_breakpoints)
    Bd = B.toarray()
    Ad = A.toarray()
    R = np.eye(A.n_rows) - Ad @ Bd
    return NormReport(
        p=p, r=r, n_hat=A.n_cols,
        norm_B_inf=float(np.abs(Bd).sum(axis=1).max()),
        norm_omega_2=float(np.linalg.norm(B.omega)),
        norm_residual_2=spectral_norm(R),
        norm_residual_inf=float(np.abs(R).sum(axis=1).max()),
    )


def norm_report_2d(p: int, r: int, num_breakpoints: int = DEFAULT_BREAKPOINTS_2D,
                   max_entries: int | None = None) -> NormReport:
    """Tensor-product stability report with equal widths in both directions.

    Builds the dense Kronecker operators, so it is intended for the moderate
    sizes of the stability tables.  ``||omega||_2`` reports the per-direction
    stencil norm; ``||B_y kron B_x||_inf`` equals the squared univariate
    infinity norm.
    """
    A, B = build_left_inverse(p, r, num_breakpoints)
    kw = {} if max_entries is None else {"max_entries": max_entries}
    A2 = materialize_kronecker([A, A], **kw)
    B2 = np.kron(B.toarray(), B.toarray())
    R = np.eye(A2.shape[0]) - A2 @ B2
    return NormReport(
        p=p, r=r, n_hat=A.n_cols,
        norm_B_inf=float(np.abs(B2).sum(axis=1).max()),
        norm_omega_2=float(np.linalg.norm(B.omega)),
        norm_residual_2=spectral_norm(R),
        norm_residual_inf=float(np.abs(R).sum(axis=1).max()),
    )


# ---------------------------------------------------------------------------
# Gram matrices and L2 projection


class GramMatrix:
    """Banded SPD matrix of basis inner products ``G[i, j] = int beta_i beta_j``.

    Stores the upper banded form together with its Cholesky factorization;
    construction fails if the matrix is not positive definite.
    """

    def __init__(self, space: SplineSpace, banded_upper: np.ndarray):
        self.space = space
        self.banded_upper = banded_upper
        self._cho = scipy.linalg.cholesky_banded(banded_upper)
        p = space.degree
        n = space.dim
        offsets = np.maximum(np.arange(n) - p, 0).astype(np.int64)
        widths = (np.minimum(np.arange(n) + p, n - 1) - offsets + 1).astype(np.int64)
        data = np.zeros((n, int(widths.max())))
        dense = self.toarray()
        for i in range(n):
            data[i, :widths[i]] = dense[i, offsets[i]:offsets[i] + widths[i]]
        self._rows = (offsets, widths, data)

    @property
    def bandwidth(self):
        return self.space.degree

    def toarray(self) -> np.ndarray:
        n = self.space.dim
        p = self.space.degree
        G = np.zeros((n, n))
        for d in range(p + 1):
            diag = self.banded_upper[p - d, d:]
            G += np.diag(diag, k=d)
            if d:
                G += np.diag(diag, k=-d)
        return G

    def dot(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        x2 = x[:, None] if x.ndim == 1 else x
        out = kernels.banded_rows_apply(*self._rows, np.ascontiguousarray(x2))
        return out[:, 0] if x.ndim == 1 else out

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve_banded((self._cho, False), rhs)


def gram_matrix(space: SplineSpace) -> GramMatrix:
    """Assemble the Gram matrix with a ``p + 1``-point Gauss rule per element."""
    p = space.degree
    xs, ws = gauss_points(space, p + 1)
    E = collocation_matrix(space, xs)
    dense = E.T @ (ws[:, None] * E)
    ab = np.zeros((p + 1, space.dim))
    for d in range(p + 1):
        ab[p - d, d:] = np.diagonal(dense, offset=d)
    return GramMatrix(space, ab)


def l2_project_spline(coeffs, coarse, fine, A) -> np.ndarray:
    """L2-orthogonal projection of a fine spline onto the coarse space.

    Solves ``G_coarse chat = A^T G_fine c`` per direction; `coarse`/`fine`
    may be :class:`SplineSpace` (vector coefficients, single matrix `A`) or
    :class:`TensorSpace` (grid coefficients, one matrix per direction).
    """
    if isinstance(coarse, TensorSpace):
        mats = list(A)
        if len(mats) != coarse.ndim or fine.ndim != coarse.ndim:
            raise DimensionMismatchError("need one subdivision matrix per direction")
        data = np.asarray(coeffs, dtype=float)
        for d in range(coarse.ndim):
            Gf = gram_matrix(fine.directions[d])
            data = _apply_mode(Gf.dot, data, d)
            data = _apply_mode(mats[d].apply_transpose, data, d)
            Gc = gram_matrix(coarse.directions[d])
            data = _apply_mode(Gc.solve, data, d)
        return data
    c = np.asarray(coeffs, dtype=float)
    Gf = gram_matrix(fine)
    Gc = gram_matrix(coarse)
    return Gc.solve(A.apply_transpose(Gf.dot(c)))


def _eval_function_2d(f, xg, yg):
    try:
        out = np.asarray(f(xg[:, None], yg[None, :]), dtype=float)
        if out.shape == (len(xg), len(yg)):
            return out
    except Exception:
        pass
    return np.vectorize(f)(xg[:, None], yg[None, :]).astype(float)


def l2_project_function(f, space, points_per_element: int | None = None) -> np.ndarray:
    """Coefficients of the L2 projection of `f` onto a spline space.

    The load term uses ``p + 3`` Gauss points per element (per direction)
    unless overridden.  `f` should accept numpy arrays; 2D callbacks are
    evaluated on the tensor quadrature grid.
    """
    if isinstance(space, TensorSpace):
        if space.ndim != 2:
            raise DimensionMismatchError("function projection supports 1D and 2D spaces")
        sx, sy = space.directions
        ptsx = points_per_element or sx.degree + 3
        ptsy = points_per_element or sy.degree + 3
        xs, wx = gauss_points(sx, ptsx)
        ys, wy = gauss_points(sy, ptsy)
        Ex = collocation_matrix(sx, xs)
        Ey = collocation_matrix(sy, ys)
        F = _eval_function_2d(f, xs, ys)
        load = Ex.T @ (wx[:, None] * F * wy[None, :]) @ Ey
        Gx = gram_matrix(sx)
        Gy = gram_matrix(sy)
        return Gy.solve(Gx.solve(load).T).T
    pts = points_per_element or space.degree + 3
    xs, ws = gauss_points(space, pts)
    E = collocation_matrix(space, xs)
    load = E.T @ (ws * np.asarray(f(xs), dtype=float))
    return gram_matrix(space).solve(load)


def l2_error(coeffs, space, f, points_per_element: int | None = None) -> float:
    """L2 norm of ``(spline - f)`` by per-element Gauss quadrature."""
    if isinstance(space, TensorSpace):
        if space.ndim != 2:
            raise DimensionMismatchError("error quadrature supports 1D and 2D spaces")
        sx, sy = space.directions
        C = np.asarray(coeffs, dtype=float)
        if C.shape != space.shape:
            raise DimensionMismatchError(f"expected grid of shape {space.shape}")
        xs, wx = gauss_points(sx, points_per_element or sx.degree + 3)
        ys, wy = gauss_points(sy, points_per_element or sy.degree + 3)
        fax, vx = eval_basis_many(sx, xs)
        fay, vy = eval_basis_many(sy, ys)
        S = kernels.eval_grid_2d(fax, vx, fay, vy, np.ascontiguousarray(C))
        F = _eval_function_2d(f, xs, ys)
        return float(np.sqrt(np.sum((wx[:, None] * wy[None, :]) * (S - F) ** 2)))
    c = np.asarray(coeffs, dtype=float)
    xs, ws = gauss_points(space, points_per_element or space.degree + 3)
    E = collocation_matrix(space, xs)
    diff = E @ c - np.asarray(f(xs), dtype=float)
    return float(np.sqrt(np.sum(ws * diff * diff)))


def _sample_grid(space: SplineSpace, samples_per_element: int) -> np.ndarray:
    bps = space.knots.breakpoints()
    pieces = [np.linspace(bps[i], bps[i + 1], samples_per_element, endpoint=False)
              for i in range(len(bps) - 1)]
    return np.concatenate(pieces + [[space.b]])


def linf_relative_error(coeffs_a, coeffs_b, space, samples_per_element: int = 10) -> float:
    """Relative max-norm deviation of spline `a` from reference spline `b`.

    Both coefficient sets live in `space`; the splines are compared on a
    dense grid of `samples_per_element` points per element (per direction)
    and normalized by the maximum magnitude of the reference.
    """
    if isinstance(space, TensorSpace):
        if space.ndim != 2:
            raise DimensionMismatchError("sampling supports 1D and 2D spaces")
        sx, sy = space.directions
        xs = _sample_grid(sx, samples_per_element)
        ys = _sample_grid(sy, samples_per_element)
        fax, vx = eval_basis_many(sx, xs)
        fay, vy = eval_basis_many(sy, ys)
        Sa = kernels.eval_grid_2d(fax, vx, fay, vy,
                                  np.ascontiguousarray(np.asarray(coeffs_a, dtype=float)))
        Sb = kernels.eval_grid_2d(fax, vx, fay, vy,
                                  np.ascontiguousarray(np.asarray(coeffs_b, dtype=float)))
    else:
        xs = _sample_grid(space, samples_per_element)
        E = collocation_matrix(space, xs)
        Sa = E @ np.asarray(coeffs_a, dtype=float)
        Sb = E @ np.asarray(coeffs_b, dtype=float)
    ref = np.abs(Sb).max()
    if ref == 0.0:
        raise ValueError("reference spline is identically zero on the sample grid")
    return float(np.abs(Sa - Sb).max() / ref)


@dataclass(frozen=True)
class ErrorCurve:
    """L2 error against degrees of freedom along successive coarsenings."""

    method: str
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((int(d), float(e)) for d, e in self.entries))
        dofs = [d for d, _ in self.entries]
        if any(b >= a for a, b in zip(dofs, dofs[1:])):
            raise ValueError("dofs must be strictly decreasing along a curve")

    def dofs(self):
        return [d for d, _ in self.entries]

    def errors(self):
        return [e for _, e in self.entries]
