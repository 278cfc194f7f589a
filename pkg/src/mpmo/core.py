"""Foundational types, Pareto and multiparty dominance, nondominated sorting.

Populations of multiparty objective values are handled in a flat layout: a
2-D float array with one row per solution and the parties' objectives
concatenated party-major, plus the tuple of per-party arities. A single
solution's :data:`PartyObjectives` is a list of 1-D arrays, one per party.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from mpmo import kernels


class ContractViolation(ValueError):
    """An operation was called with inputs outside its precondition."""


class DimensionError(ContractViolation):
    """Decision-space dimension below the minimum a problem supports."""


PartyObjectives = list  # list[np.ndarray], one objective vector per party


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ContractViolation("bounds must be 1-D arrays of equal length")
        if not np.all(lower < upper):
            raise ContractViolation("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clip(self, X):
        return np.clip(X, self.lower, self.upper)


def as_decision_vector(x, n: int | None = None) -> np.ndarray:
    """Validate and return ``x`` as a finite 1-D float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ContractViolation(f"decision vector must be 1-D, got shape {x.shape}")
    if n is not None and x.size != n:
        raise ContractViolation(f"decision vector has length {x.size}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise ContractViolation("decision vector contains NaN or Inf")
    return x


def offsets_of(arities: Sequence[int]) -> np.ndarray:
    """Column offsets of each party in the flat layout."""
    return np.concatenate([[0], np.cumsum(arities)]).astype(np.int64)


def split_parties(row, arities: Sequence[int]) -> PartyObjectives:
    off = offsets_of(arities)
    row = np.asarray(row, dtype=float)
    return [row[off[j]:off[j + 1]].copy() for j in range(len(arities))]


def flatten_population(pop, arities: Sequence[int] | None = None):
    """Convert a population to ``(F, arities)`` in the flat layout.

    ``pop`` is either a 2-D array (``arities`` then required) or a sequence of
    :data:`PartyObjectives`.
    """
    if isinstance(pop, np.ndarray) and pop.ndim == 2:
        if arities is None:
            raise ContractViolation("arities are required with a flat objective array")
        arities = tuple(int(a) for a in arities)
        if sum(arities) != pop.shape[1]:
            raise ContractViolation(f"arities {arities} do not match {pop.shape[1]} columns")
        return np.asarray(pop, dtype=float), arities
    pop = list(pop)
    if not pop:
        return np.empty((0, sum(arities or ()))), tuple(arities or ())
    first = tuple(len(np.atleast_1d(p)) for p in pop[0])
    if arities is not None and tuple(arities) != first:
        raise ContractViolation(f"party arities {first} do not match declared {tuple(arities)}")
    rows = []
    for s in pop:
        if tuple(len(np.atleast_1d(p)) for p in s) != first:
            raise ContractViolation("inconsistent party structure within population")
        rows.append(np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in s]))
    return np.vstack(rows), first


@dataclass
class MPProblem:
    """An evaluatable multiparty problem.

    ``batch_evaluator`` maps an ``(N, n)`` array of decision vectors to an
    ``(N, sum(arities))`` array in the flat layout. ``constraint_evaluator``
    (optional) maps the same batch to ``(N, k)`` non-negative violation
    magnitudes, 0 meaning satisfied. ``initializer`` (optional) draws a
    starting population for population-based solvers.
    """

    id: str
    n: int
    arities: tuple[int, ...]
    bounds: Bounds
    batch_evaluator: Callable[[np.ndarray], np.ndarray]
    constraint_evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    ps_sampler: Callable[[int, int], np.ndarray] | None = None
    initializer: Callable[[np.random.Generator, int], np.ndarray] | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.arities)

    @property
    def offsets(self) -> np.ndarray:
        return offsets_of(self.arities)

    def evaluate(self, x) -> PartyObjectives:
        x = as_decision_vector(x, self.n)
        return split_parties(self.batch_evaluator(x[None, :])[0], self.arities)

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise ContractViolation(f"expected {self.n} decision variables, got {X.shape[1]}")
        return self.batch_evaluator(X)

    def violations(self, X) -> np.ndarray:
        """Total constraint violation per row (0 for unconstrained problems)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.constraint_evaluator is None:
            return np.zeros(X.shape[0])
        return self.constraint_evaluator(X).sum(axis=1)


def pareto_dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ContractViolation(f"objective vectors differ in shape: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_sort(objs) -> np.ndarray:
    """Nondominated-sort rank of each objective vector (0 = first front)."""
    F = np.atleast_2d(np.asarray(objs, dtype=float))
    if F.shape[0] == 0 or F.size == 0:
        raise ContractViolation("nondominated_sort needs at least one point")
    return kernels.nd_rank(F)


def _check_structure(a, b):
    if len(a) != len(b):
        raise ContractViolation(f"party count differs: {len(a)} vs {len(b)}")
    for pa, pb in zip(a, b):
        if np.shape(pa) != np.shape(pb):
            raise ContractViolation("party arities differ")


def mp_dominates(a: PartyObjectives, b: PartyObjectives) -> bool:
    """Multiparty dominance of solution ``a`` over solution ``b``.

    Holds when no party prefers ``b`` (``b_j`` Pareto-dominates ``a_j``) and at
    least one party prefers ``a``. The relation is irreflexive and asymmetric
    but not transitive in general.
    """
    _check_structure(a, b)
    strict = False
    for pa, pb in zip(a, b):
        if pareto_dominates(pb, pa):
            return False
        if pareto_dominates(pa, pb):
            strict = True
    return strict


def mp_nondominated_mask(F, arities) -> np.ndarray:
    """Boolean mask of multiparty-nondominated rows of a flat population."""
    F = np.asarray(F, dtype=float)
    if F.shape[0] == 0:
        raise ContractViolation("population is empty")
    return kernels.mp_nd_mask(F, offsets_of(arities))


def mp_nondominated_filter(pop, arities=None) -> list[int]:
    """Indices of multiparty-nondominated members, in input order."""
    F, arities = flatten_population(pop, arities)
    return np.flatnonzero(mp_nondominated_mask(F, arities)).tolist()
