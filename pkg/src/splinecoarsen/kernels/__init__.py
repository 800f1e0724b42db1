"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time: numba when it imports cleanly,
numpy otherwise.  Setting the environment variable ``SPLINECOARSEN_NO_NUMBA``
to ``1``/``true``/``yes`` forces the numpy path (useful for debugging and for
the benchmark in ``benchmarks/bench_kernels.py``, which times both).
"""

import os

_disabled = os.environ.get("SPLINECOARSEN_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

if not _disabled:
    try:
        from ._numba import banded_rows_apply, basis_values_many, eval_grid_2d
        BACKEND = "numba"
    except ImportError:
        from ._numpy import banded_rows_apply, basis_values_many, eval_grid_2d
        BACKEND = "numpy"
else:
    from ._numpy import banded_rows_apply, basis_values_many, eval_grid_2d
    BACKEND = "numpy"

__all__ = ["BACKEND", "banded_rows_apply", "basis_values_many", "eval_grid_2d"]
