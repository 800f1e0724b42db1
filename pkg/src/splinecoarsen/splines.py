"""Univariate uniform spline spaces.

Open knot vectors over ``[a, b]`` with equispaced breakpoints, their dyadic
refinement, B-spline basis evaluation (local de Boor recurrence), and
per-element Gauss-Legendre quadrature.

Knot vectors are stored as ``(a, b, degree, num_breakpoints)`` and the float
knot values are materialized on demand.  Breakpoint ``i`` is computed as
``a + (b - a) * i / (N - 1)``, which makes the knots of a vector an exact
(bitwise) subsequence of the knots of its dyadic refinement.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError

#: relative tolerance (times b - a) for accepting points just outside [a, b]
DOMAIN_TOL = 1e-14


@dataclass(frozen=True)
class KnotVector:
    """A ``(p+1)``-open knot vector with uniform interior breakpoints."""

    a: float
    b: float
    degree: int
    num_breakpoints: int

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if self.num_breakpoints < 2:
            raise ValueError(f"need at least 2 breakpoints, got {self.num_breakpoints}")
        if not self.a < self.b:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")

    @property
    def n(self) -> int:
        """Dimension of the spline space over this knot vector."""
        return self.degree + self.num_breakpoints - 1

    @property
    def step(self) -> float:
        return (self.b - self.a) / (self.num_breakpoints - 1)

    def breakpoints(self) -> np.ndarray:
        N = self.num_breakpoints
        bps = self.a + (self.b - self.a) * np.arange(N) / (N - 1)
        bps[-1] = self.b
        return bps

    def as_array(self) -> np.ndarray:
        """Materialize the full knot sequence of length ``n + p + 1``."""
        p = self.degree
        bps = self.breakpoints()
        return np.concatenate([np.full(p, self.a), bps, np.full(p, self.b)])


def make_open_knot_vector(a: float, b: float, num_breakpoints: int, degree: int) -> KnotVector:
    """Open knot vector for `num_breakpoints` equispaced breakpoints on ``[a, b]``."""
    return KnotVector(float(a), float(b), int(degree), int(num_breakpoints))


def dyadic_refine(kv: KnotVector) -> KnotVector:
    """Insert the midpoint of every subinterval: ``N`` breakpoints become ``2N - 1``."""
    return KnotVector(kv.a, kv.b, kv.degree, 2 * kv.num_breakpoints - 1)


@dataclass(frozen=True)
class BasisEvaluation:
    """The ``p+1`` B-spline values active at a point.

    ``values[s]`` is the value of basis function ``first_active + s``
    (0-based numbering); all other basis functions vanish at `x`.
    """

    x: float
    first_active: int
    values: np.ndarray = field(repr=False)


class SplineSpace:
    """Spline space of maximum smoothness over a uniform open knot vector.

    Immutable after construction; instances are safe to share between
    threads.
    """

    def __init__(self, knots: KnotVector):
        self.knots = knots
        self.degree = knots.degree
        self.dim = knots.n
        self.knot_array = knots.as_array()

    @classmethod
    def uniform(cls, a, b, num_breakpoints, degree):
        return cls(make_open_knot_vector(a, b, num_breakpoints, degree))

    @property
    def a(self):
        return self.knots.a

    @property
    def b(self):
        return self.knots.b

    def refine(self) -> "SplineSpace":
        return SplineSpace(dyadic_refine(self.knots))

    def greville(self) -> np.ndarray:
        """Greville abscissae, the knot averages associated with each basis function."""
        p = self.degree
        t = self.knot_array
        return np.array([t[i + 1:i + p + 1].mean() for i in range(self.dim)])

    def __repr__(self):
        k = self.knots
        return (f"SplineSpace(p={k.degree}, N={k.num_breakpoints}, "
                f"dim={self.dim}, [{k.a}, {k.b}])")


def _clamp_domain(space: SplineSpace, x: float) -> float:
    tol = DOMAIN_TOL * (space.b - space.a)
    if x < space.a - tol or x > space.b + tol:
        raise DomainError(f"x={x} outside [{space.a}, {space.b}]")
    return min(max(x, space.a), space.b)


def eval_basis(space: SplineSpace, x: float) -> BasisEvaluation:
    """Evaluate the ``p+1`` basis functions active at `x`."""
    xc = _clamp_domain(space, float(x))
    first, vals = kernels.basis_values_many(space.knot_array, space.degree, np.array([xc]))
    return BasisEvaluation(x=xc, first_active=int(first[0]), values=vals[0])


def eval_basis_many(space: SplineSpace, xs) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`eval_basis`; returns ``(first_active, values)`` arrays."""
    xs = np.asarray(xs, dtype=float)
    tol = DOMAIN_TOL * (space.b - space.a)
    if xs.size and (xs.min() < space.a - tol or xs.max() > space.b + tol):
        raise DomainError(f"points outside [{space.a}, {space.b}]")
    xs = np.clip(xs, space.a, space.b)
    return kernels.basis_values_many(space.knot_array, space.degree, xs)


def collocation_matrix(space: SplineSpace, xs) -> np.ndarray:
    """Dense matrix ``E[g, i] = beta_i(xs[g])``."""
    first, vals = eval_basis_many(space, xs)
    E = np.zeros((len(xs), space.dim))
    rows = np.arange(len(xs))
    for s in range(space.degree + 1):
        E[rows, first + s] = vals[:, s]
    return E


def gauss_points(space: SplineSpace, points_per_element: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on every knot span.

    Exact for polynomials of degree ``2 * points_per_element - 1`` on each
    span.  Returns flat arrays ordered element by element.
    """
    if points_per_element < 1:
        raise ValueError("points_per_element must be >= 1")
    gx, gw = np.polynomial.legendre.leggauss(points_per_element)
    bps = space.knots.breakpoints()
    lo, hi = bps[:-1], bps[1:]
    mid = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel()
    return nodes, weights


def evaluate_spline(space: SplineSpace, coeffs, xs) -> np.ndarray:
    """Values of ``sum_i coeffs[i] beta_i`` at the points `xs`."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (space.dim,):
        raise ValueError(f"expected {space.dim} coefficients, got {coeffs.shape}")
    first, vals = eval_basis_many(space, xs)
    out = np.zeros(len(vals))
    for s in range(space.degree + 1):
        out += vals[:, s] * coeffs[first + s]
    return out
