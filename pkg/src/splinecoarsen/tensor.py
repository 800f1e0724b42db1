"""Tensor-product spline spaces and Kronecker-structured grid transfer.

Subdivision and coarsening act on a D-dimensional coefficient grid one
direction at a time (mode-wise), which is algebraically identical to applying
the Kronecker product of the per-direction operators to the vectorized grid
but never materializes that product.  The vectorization convention is
Fortran order: the first direction's index varies fastest, so for matrices
``[M_1, ..., M_D]`` (one per direction) the dense equivalent acting on
``vec(C)`` is ``M_D kron ... kron M_1``.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, MismatchedSpacesError, SizeCapExceededError
from .splines import KnotVector, SplineSpace

#: default cap (total entries) for dense Kronecker materialization
KRONECKER_ENTRY_CAP = 20000 * 20000


class TensorSpace:
    """Tensor product of univariate spline spaces, one per direction."""

    def __init__(self, directions):
        directions = tuple(directions)
        if not directions:
            raise ValueError("need at least one direction")
        self.directions = directions

    @property
    def ndim(self):
        return len(self.directions)

    @property
    def shape(self):
        return tuple(s.dim for s in self.directions)

    @property
    def dim(self):
        return int(np.prod(self.shape))

    def refine(self):
        return TensorSpace(s.refine() for s in self.directions)

    def __repr__(self):
        return f"TensorSpace{self.shape}"


@dataclass(frozen=True)
class CoefficientGrid:
    """Coefficients of a tensor-product spline, one array axis per direction.

    ``vec`` semantics are Fortran order (first axis fastest).
    """

    space: TensorSpace
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != self.space.shape:
            raise DimensionMismatchError(
                f"grid shape {self.data.shape} does not match space {self.space.shape}")

    def vec(self) -> np.ndarray:
        return self.data.reshape(-1, order="F")


@dataclass(frozen=True)
class TensorCoarseningOperator:
    """Per-direction left inverses applied mode-wise."""

    per_direction: tuple

    def __post_init__(self):
        object.__setattr__(self, "per_direction", tuple(self.per_direction))


def _apply_mode(apply_fn, data: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(data, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    out = apply_fn(flat)
    out = out.reshape((out.shape[0],) + moved.shape[1:])
    return np.moveaxis(out, 0, axis)


def refine_grid(grid: CoefficientGrid, subdivisions) -> CoefficientGrid:
    """Apply one subdivision matrix per direction; returns the fine grid."""
    subdivisions = list(subdivisions)
    if len(subdivisions) != grid.space.ndim:
        raise DimensionMismatchError(
            f"got {len(subdivisions)} matrices for {grid.space.ndim} directions")
    data = grid.data
    for d, A in enumerate(subdivisions):
        if A.n_cols != data.shape[d]:
            raise DimensionMismatchError(
                f"direction {d}: matrix expects {A.n_cols} coefficients, grid has {data.shape[d]}")
        data = _apply_mode(A.apply, data, d)
    return CoefficientGrid(grid.space.refine(), data)


def coarsen_grid(grid: CoefficientGrid, op: TensorCoarseningOperator,
                 coarse_space: TensorSpace | None = None) -> CoefficientGrid:
    """Apply one coarsening operator per direction; returns the coarse grid."""
    ops = op.per_direction
    if len(ops) != grid.space.ndim:
        raise DimensionMismatchError(
            f"got {len(ops)} operators for {grid.space.ndim} directions")
    data = grid.data
    for d, B in enumerate(ops):
        if B.n != data.shape[d]:
            raise DimensionMismatchError(
                f"direction {d}: operator expects {B.n} coefficients, grid has {data.shape[d]}")
        data = _apply_mode(B.apply, data, d)
    if coarse_space is None:
        spaces = []
        for s in grid.space.directions:
            N = s.knots.num_breakpoints
            if N % 2 == 0:
                raise MismatchedSpacesError(
                    f"fine breakpoint count {N} is not of the form 2*N_coarse - 1")
            spaces.append(SplineSpace(KnotVector(s.a, s.b, s.degree, (N + 1) // 2)))
        coarse_space = TensorSpace(spaces)
    return CoefficientGrid(coarse_space, data)


def materialize_kronecker(factors, max_entries: int = KRONECKER_ENTRY_CAP) -> np.ndarray:
    """Dense ``M_D kron ... kron M_1`` for per-direction matrices ``[M_1, ..., M_D]``.

    Consistent with the Fortran-order ``vec`` of :class:`CoefficientGrid`.
    Intended for verification and small dense norm computations only; raises
    when the result would exceed `max_entries` entries.
    """
    mats = [m.toarray() if hasattr(m, "toarray") else np.asarray(m, dtype=float)
            for m in factors]
    rows = int(np.prod([m.shape[0] for m in mats]))
    cols = int(np.prod([m.shape[1] for m in mats]))
    if rows * cols > max_entries:
        raise SizeCapExceededError(
            f"dense Kronecker product would have {rows}x{cols} entries (cap {max_entries})")
    out = mats[-1]
    for m in reversed(mats[:-1]):
        out = np.kron(out, m)
    return out


# ---------------------------------------------------------------------------
# grid file formats


def grid_to_csv(grid_data: np.ndarray, path):
    """Write a 1D or 2D grid as CSV: header line ``rows,cols``, then row-major values."""
    data = np.asarray(grid_data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2:
        raise DimensionMismatchError("CSV grids must be 1D or 2D; use the binary format")
    with open(path, "w") as fh:
        fh.write(f"{data.shape[0]},{data.shape[1]}\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def grid_from_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
        try:
            rows, cols = (int(tok) for tok in header.split(","))
        except ValueError as exc:
            raise ValueError(f"bad grid CSV header {header!r}") from exc
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (rows, cols):
        raise DimensionMismatchError(
            f"grid CSV body {data.shape} does not match header ({rows}, {cols})")
    return data


def grid_to_binary(grid_data: np.ndarray, path):
    """Binary grid format for any D: int64 ndim, int64 dims, float64 row-major data."""
    data = np.ascontiguousarray(grid_data, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", data.ndim))
        fh.write(struct.pack(f"<{data.ndim}q", *data.shape))
        fh.write(data.tobytes())


def grid_from_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (ndim,) = struct.unpack("<q", fh.read(8))
        shape = struct.unpack(f"<{ndim}q", fh.read(8 * ndim))
        data = np.frombuffer(fh.read(), dtype=np.float64)
    if data.size != int(np.prod(shape)):
        raise DimensionMismatchError("binary grid payload does not match its header")
    return data.reshape(shape)
