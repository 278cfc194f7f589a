"""Benchmark toolkit for multiparty multiobjective optimization."""

__version__ = "0.1.0"

from mpmo.core import (  # noqa: E402
    Bounds,
    ContractViolation,
    DimensionError,
    MPProblem,
    mp_dominates,
    mp_nondominated_filter,
    nondominated_sort,
    pareto_dominates,
)
from mpmo.kernels import BACKEND  # noqa: E402

__all__ = [
    "BACKEND",
    "Bounds",
    "ContractViolation",
    "DimensionError",
    "MPProblem",
    "__version__",
    "mp_dominates",
    "mp_nondominated_filter",
    "nondominated_sort",
    "pareto_dominates",
]
