"""The two tensor-product coarsening experiments.

``coarsening_curve`` projects a reference function onto a fine biquadratic
(or other degree) space on the unit square, coarsens the coefficients
level by level with the local operators, and records the L2 error per level
next to the direct L2-projection baseline.

``localized_coarsening`` starts from a spline whose coefficients are one on a
localized index region and zero elsewhere (a sharp jump along the region
boundary), coarsens the 40x40-element space once to 20x20, and reports how
many fine coefficients each method modifies and the relative max-norm error.
"""

from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    ErrorCurve,
    _sample_grid,
    l2_error,
    l2_project_function,
    l2_project_spline,
    linf_relative_error,
)
from .left_inverse import assemble_left_inverse, lookup_parameters
from .splines import SplineSpace, collocation_matrix
from .subdivision import build_subdivision_matrix
from .tensor import CoefficientGrid, TensorCoarseningOperator, TensorSpace, coarsen_grid, refine_grid

#: threshold for counting a fine coefficient as modified
MODIFIED_TOL = 1e-10

PROJECTION_METHOD = "l2-projection"


def arctan_ring(x, y):
    """Ring-shaped arctan front centered inside the unit square."""
    return np.arctan(5.0 * ((4.0 * x - 3.5) ** 2 + (4.0 * y - 3.0) ** 2 - 5.0))


def _square_space(p, num_breakpoints):
    s = SplineSpace.uniform(0.0, 1.0, num_breakpoints, p)
    return TensorSpace([s, s])


def width_is_feasible(p: int, r: int, n_hat: int) -> bool:
    """Whether the width-``r`` operator fits a coarse space of dimension `n_hat`."""
    return n_hat >= 2 * lookup_parameters(p, r).ell + 1


def coarsening_curve(p: int, widths, elements: int = 128, levels: int = 4,
                     f=arctan_ring) -> list[ErrorCurve]:
    """Successive-coarsening error curves on ``[0, 1]^2``.

    Starts from the L2 projection of `f` onto the space with
    ``elements x elements`` elements and applies `levels` dyadic coarsenings
    per width.  Returns one curve per width plus the projection baseline
    (method :data:`PROJECTION_METHOD`).  A width's curve stops early at the
    last level whose coarse space still admits the operator.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    N0 = elements + 1
    sizes = [N0]
    for _ in range(levels):
        N = sizes[-1]
        if (N + 1) % 2 != 0 or (N + 1) // 2 < 2:
            raise ValueError(f"cannot halve a mesh with {N} breakpoints")
        sizes.append((N + 1) // 2)

    fine_space = _square_space(p, N0)
    C0 = l2_project_function(f, fine_space)

    curves = []
    for r in widths:
        params = lookup_parameters(p, r)
        grid = CoefficientGrid(fine_space, C0)
        entries = []
        for level in range(1, levels + 1):
            Nc = sizes[level]
            coarse_space = _square_space(p, Nc)
            if not width_is_feasible(p, r, coarse_space.directions[0].dim):
                break
            A = build_subdivision_matrix(coarse_space.directions[0],
                                         grid.space.directions[0])
            B = assemble_left_inverse(A, params)
            grid = coarsen_grid(grid, TensorCoarseningOperator((B, B)), coarse_space)
            err = l2_error(grid.data, coarse_space, f)
            entries.append((coarse_space.dim, err))
        curves.append(ErrorCurve(method=f"coarsen-r{r}", entries=entries))

    proj_entries = []
    for level in range(1, levels + 1):
        coarse_space = _square_space(p, sizes[level])
        Cp = l2_project_function(f, coarse_space)
        proj_entries.append((coarse_space.dim, l2_error(Cp, coarse_space, f)))
    curves.append(ErrorCurve(method=PROJECTION_METHOD, entries=proj_entries))
    return curves


# ---------------------------------------------------------------------------
# localized single coarsening


def disk_region_mask(shape, center=None, radius: float = 7.8) -> np.ndarray:
    """Boolean coefficient-index mask of a disk.

    The default center is the middle of the index grid; the default radius
    reproduces the reported modified-coefficient fractions on the
    40x40-element biquadratic setup.
    """
    nx, ny = shape
    if center is None:
        center = ((nx - 1) // 2, (ny - 1) // 2)
    cx, cy = center
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    return (ii - cx) ** 2 + (jj - cy) ** 2 <= radius ** 2


@dataclass(frozen=True)
class LocalizedMethodResult:
    method: str
    modified_fraction: float
    rel_linf_error: float
    coarse_coeffs: np.ndarray = field(repr=False)
    fine_error_coeffs: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class LocalizedResult:
    p: int
    elements: int
    region_mask: np.ndarray
    sample_points: np.ndarray
    original_samples: np.ndarray
    methods: tuple


def localized_coarsening(p: int = 2, widths=(6, 8), elements: int = 40,
                         region_mask=None, samples_per_element: int = 10) -> LocalizedResult:
    """Single uniform coarsening of a localized 0/1 coefficient spline.

    For the L2 projection and each locality width, reports the fraction of
    fine coefficients modified (nonzeros of the error expressed in the fine
    space) and the relative max-norm error against the original spline, and
    returns dense surface samples for contour plotting.
    """
    if elements % 2 != 0:
        raise ValueError("element count must be even to coarsen once")
    fine_space = _square_space(p, elements + 1)
    coarse_space = _square_space(p, elements // 2 + 1)
    sx_f = fine_space.directions[0]
    sx_c = coarse_space.directions[0]
    if region_mask is None:
        region_mask = disk_region_mask(fine_space.shape)
    region_mask = np.asarray(region_mask, dtype=bool)
    if region_mask.shape != fine_space.shape:
        raise ValueError(f"region mask shape {region_mask.shape} != {fine_space.shape}")

    C = np.zeros(fine_space.shape)
    C[region_mask] = 1.0
    A = build_subdivision_matrix(sx_c, sx_f)

    xs = _sample_grid(sx_f, samples_per_element)
    Ef = collocation_matrix(sx_f, xs)
    original_samples = Ef @ C @ Ef.T

    def measure(method, Chat):
        back = refine_grid(CoefficientGrid(coarse_space, Chat), [A, A]).data
        err_coeffs = C - back
        frac = float((np.abs(err_coeffs) > MODIFIED_TOL).sum() / err_coeffs.size)
        rel = linf_relative_error(back, C, fine_space,
                                  samples_per_element=samples_per_element)
        return LocalizedMethodResult(method, frac, rel, Chat, err_coeffs,
                                     Ef @ back @ Ef.T)

    results = [measure(PROJECTION_METHOD, l2_project_spline(C, coarse_space, fine_space, [A, A]))]
    for r in widths:
        B = assemble_left_inverse(A, lookup_parameters(p, r))
        Chat = coarsen_grid(CoefficientGrid(fine_space, C),
                            TensorCoarseningOperator((B, B)), coarse_space).data
        results.append(measure(f"coarsen-r{r}", Chat))

    return LocalizedResult(p=p, elements=elements, region_mask=region_mask,
                           sample_points=xs, original_samples=original_samples,
                           methods=tuple(results))
