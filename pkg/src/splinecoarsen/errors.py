"""Exception types shared across the package.

All of them derive from ValueError so that generic callers can catch a
single type; the CLI maps the size/dimension family to exit code 3 and
the configuration family to exit code 2.
"""


class DomainError(ValueError):
    """Evaluation point lies outside the knot-vector interval."""


class MismatchedSpacesError(ValueError):
    """Two spline spaces are not related by one dyadic refinement."""


class DimensionMismatchError(ValueError):
    """Coefficient data does not match an operator or space dimension."""


class TooSmallSpaceError(ValueError):
    """The spline space is too small for the requested construction."""


class UnsupportedWidthError(ValueError):
    """Locality width is not of the admissible form for this degree."""


class RankDeficientError(ValueError):
    """A local submatrix fails the full-column-rank requirement."""


class NoValidConfigurationError(ValueError):
    """The parameter search found no full-rank local configuration."""


class SizeCapExceededError(ValueError):
    """A dense Kronecker product would exceed the configured size cap."""
