"""Local coarsening operators for uniform B-spline spaces.

Construct subdivision (knot-insertion) matrices between a uniform spline
space and its dyadic refinement, build banded left inverses of them by local
least squares, extend both to tensor-product spaces through their Kronecker
structure, and measure stability and approximation quality against the global
L2 projection.
"""

from .analysis import (
    ErrorCurve,
    GramMatrix,
    NormReport,
    gram_matrix,
    l2_error,
    l2_project_function,
    l2_project_spline,
    linf_relative_error,
    norm_report,
    norm_report_2d,
    spectral_norm,
)
from .errors import (
    DimensionMismatchError,
    DomainError,
    MismatchedSpacesError,
    NoValidConfigurationError,
    RankDeficientError,
    SizeCapExceededError,
    TooSmallSpaceError,
    UnsupportedWidthError,
)
from .experiments import (
    arctan_ring,
    coarsening_curve,
    disk_region_mask,
    localized_coarsening,
)
from .left_inverse import (
    CoarseningOperator,
    LocalityParameters,
    PARAMETER_TABLE,
    TABULATED_WIDTHS,
    ancestor_counts,
    apply_coarsening,
    assemble_left_inverse,
    build_A_in,
    build_corner_blocks,
    build_left_inverse,
    compute_omega,
    compute_omega_exact,
    derive_parameters,
    lookup_parameters,
)
from .splines import (
    BasisEvaluation,
    KnotVector,
    SplineSpace,
    dyadic_refine,
    eval_basis,
    eval_basis_many,
    evaluate_spline,
    gauss_points,
    make_open_knot_vector,
)
from .subdivision import (
    SubdivisionMatrix,
    apply_subdivision,
    build_subdivision_matrix,
    eta_vector,
)
from .tensor import (
    CoefficientGrid,
    TensorCoarseningOperator,
    TensorSpace,
    coarsen_grid,
    grid_from_binary,
    grid_from_csv,
    grid_to_binary,
    grid_to_csv,
    materialize_kronecker,
    refine_grid,
)

__version__ = "0.1.0"
