"""Baseline solvers: an MPNDS-based multiparty EA and a random-search comparator.

The EA is a generational NSGA-II-style loop. Ranking uses multiparty
nondominated sorting: each party's ordinary Pareto ranks form a rank vector
per individual, and those vectors are Pareto-sorted once more. Constraints are
handled feasibility-first on the summed violation.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, field

import numpy as np

from mpmo import kernels
from mpmo.core import ContractViolation, MPProblem, flatten_population, mp_nondominated_mask, offsets_of


@dataclass
class EAConfig:
    fe_budget: int
    seed: int = 1
    population_size: int = 100
    crossover_prob: float = 0.9
    crossover_eta: float = 20.0
    mutation_eta: float = 20.0
    mutation_prob: float | None = None  # default 1/n
    tournament_size: int = 2
    checkpoints: int = 10

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2:
            raise ContractViolation("population_size must be even and at least 2")
        if self.fe_budget < self.population_size:
            raise ContractViolation("fe_budget must be at least population_size")
        if self.tournament_size < 1:
            raise ContractViolation("tournament_size must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Archive:
    """Final feasible, multiparty-nondominated solutions of a run."""

    X: np.ndarray
    F: np.ndarray
    arities: tuple[int, ...]
    fe_used: int
    trace: list[dict] = field(default_factory=list)

    def __len__(self):
        return self.X.shape[0]


def mpnds_rank(pop, arities=None) -> np.ndarray:
    """Multiparty rank: Pareto-sort of the per-party Pareto rank vectors."""
    F, arities = flatten_population(pop, arities)
    if F.shape[0] == 0:
        raise ContractViolation("mpnds_rank needs a non-empty population")
    off = offsets_of(arities)
    R = np.column_stack([kernels.nd_rank(F[:, off[j]:off[j + 1]]) for j in range(len(arities))])
    return kernels.nd_rank(R.astype(float))


def _crowding_single(F) -> np.ndarray:
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        col = F[order, k]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def crowding_distance(F, arities) -> np.ndarray:
    """Crowding distance per party, averaged over parties."""
    off = offsets_of(arities)
    parts = [_crowding_single(F[:, off[j]:off[j + 1]]) for j in range(len(arities))]
    return np.mean(parts, axis=0)


def rank_population(F, violation, arities):
    """Feasibility-first rank and crowding of a population.

    Feasible individuals get their multiparty rank; infeasible ones are ranked
    after every feasible front, ordered by increasing violation.
    """
    n = F.shape[0]
    rank = np.empty(n, dtype=np.int64)
    crowd = np.zeros(n)
    feas = violation <= 0
    top = 0
    if feas.any():
        idx = np.flatnonzero(feas)
        r = mpnds_rank(F[idx], arities)
        rank[idx] = r
        for level in np.unique(r):
            members = idx[r == level]
            crowd[members] = crowding_distance(F[members], arities)
        top = int(r.max()) + 1
    if (~feas).any():
        idx = np.flatnonzero(~feas)
        v = violation[idx]
        # equal violations share a rank
        _, dense = np.unique(v, return_inverse=True)
        rank[idx] = top + dense
    return rank, crowd


def environmental_selection(F, violation, arities, size: int) -> np.ndarray:
    """Indices of the ``size`` survivors: by rank, last front by crowding."""
    rank, crowd = rank_population(F, violation, arities)
    order = np.lexsort((-crowd, rank))
    return np.sort(order[:size])


def _tournament(rng, rank, crowd, violation, count: int, k: int) -> np.ndarray:
    n = rank.size
    cand = rng.integers(0, n, size=(count, k))
    # lexicographic on (violation, rank, -crowding)
    keys = np.stack([violation[cand], rank[cand].astype(float), -crowd[cand]], axis=0)
    best = cand[:, 0].copy()
    best_pos = np.zeros(count, dtype=int)
    for j in range(1, k):
        better = np.zeros(count, dtype=bool)
        undecided = np.ones(count, dtype=bool)
        for key in keys:
            a = key[np.arange(count), j]
            b = key[np.arange(count), best_pos]
            better |= undecided & (a < b)
            undecided &= a == b
        best_pos = np.where(better, j, best_pos)
        best = np.where(better, cand[:, j], best)
    return best


def sbx_crossover(rng, P1, P2, lower, upper, eta: float, prob: float):
    """Simulated binary crossover with bound handling (Deb & Agrawal form)."""
    C1, C2 = P1.copy(), P2.copy()
    n_pairs, n = P1.shape
    do_pair = rng.random(n_pairs) < prob
    do_var = (rng.random((n_pairs, n)) < 0.5) & do_pair[:, None]
    y1 = np.minimum(P1, P2)
    y2 = np.maximum(P1, P2)
    diff = y2 - y1
    do_var &= diff > 1e-14
    u = rng.random((n_pairs, n))
    swap = rng.random((n_pairs, n)) < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        safe = np.where(diff > 1e-14, diff, 1.0)

        def spread(bound_gap):
            beta = 1.0 + 2.0 * bound_gap / safe
            alpha = 2.0 - beta ** (-(eta + 1.0))
            betaq = np.where(u <= 1.0 / alpha,
                             (u * alpha) ** (1.0 / (eta + 1.0)),
                             (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0)))
            return betaq

        bq1 = spread(y1 - lower)
        c1 = 0.5 * (y1 + y2 - bq1 * diff)
        bq2 = spread(upper - y2)
        c2 = 0.5 * (y1 + y2 + bq2 * diff)
    c1 = np.clip(c1, lower, upper)
    c2 = np.clip(c2, lower, upper)
    first = np.where(swap, c2, c1)
    second = np.where(swap, c1, c2)
    C1[do_var] = first[do_var]
    C2[do_var] = second[do_var]
    return C1, C2


def polynomial_mutation(rng, X, lower, upper, eta: float, prob: float):
    Y = X.copy()
    mask = rng.random(X.shape) < prob
    span = upper - lower
    d1 = (X - lower) / span
    d2 = (upper - X) / span
    u = rng.random(X.shape)
    mpow = 1.0 / (eta + 1.0)
    lo = u < 0.5
    xy = np.where(lo, 1.0 - d1, 1.0 - d2)
    val = np.where(lo,
                   2.0 * u + (1.0 - 2.0 * u) * xy ** (eta + 1.0),
                   2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy ** (eta + 1.0))
    deltaq = np.where(lo, val ** mpow - 1.0, 1.0 - val ** mpow)
    Y[mask] = (X + deltaq * span)[mask]
    return np.clip(Y, lower, upper)


class _Counter:
    def __init__(self, problem: MPProblem, budget: int):
        self.problem = problem
        self.budget = budget
        self.used = 0

    def evaluate(self, X):
        if self.used + X.shape[0] > self.budget:
            raise RuntimeError("evaluation budget exceeded")
        self.used += X.shape[0]
        return self.problem.evaluate_batch(X), self.problem.violations(X)


def _archive_of(X, F, violation, arities):
    feas = violation <= 0
    X, F = X[feas], F[feas]
    if X.shape[0] == 0:
        return X, F
    keep = mp_nondominated_mask(F, arities)
    return X[keep], F[keep]


def _checkpoints(budget: int, count: int) -> list[int]:
    if count <= 0:
        return [budget]
    return sorted({max(1, math.ceil(budget * (k + 1) / count)) for k in range(count)})


Monitor = Callable[[np.ndarray], float]


def run_baseline(problem: MPProblem, cfg: EAConfig, monitor: Monitor | None = None,
                 generation_hook: Callable[[int, np.ndarray, np.ndarray, np.ndarray], None] | None = None
                 ) -> Archive:
    """MPNDS-based EA; consumes exactly ``cfg.fe_budget`` evaluations.

    The first population comes from ``problem.initializer`` when the problem
    provides one, otherwise uniformly from the bounds.

    ``monitor`` maps the current archive's flat objectives to a metric value
    and is called at ``cfg.checkpoints`` evenly spaced evaluation counts. The
    trace always records the evaluation count and archive size, plus the
    archive objectives so metrics needing global information can be computed
    afterwards.
    """
    rng = np.random.default_rng(cfg.seed)
    lower, upper = problem.bounds.lower, problem.bounds.upper
    arities = problem.arities
    counter = _Counter(problem, cfg.fe_budget)
    N = cfg.population_size
    pm = cfg.mutation_prob if cfg.mutation_prob is not None else 1.0 / problem.n
    marks = _checkpoints(cfg.fe_budget, cfg.checkpoints)
    trace: list[dict] = []

    def record(X, F, V):
        while marks and counter.used >= marks[0]:
            marks.pop(0)
            _, AF = _archive_of(X, F, V, arities)
            entry = {"fe": counter.used, "archive_size": int(AF.shape[0]), "objectives": AF.tolist()}
            if monitor is not None and AF.shape[0]:
                entry["metric"] = float(monitor(AF))
            trace.append(entry)

    if problem.initializer is not None:
        X = problem.bounds.clip(problem.initializer(rng, N))
    else:
        X = lower + rng.random((N, problem.n)) * (upper - lower)
    F, V = counter.evaluate(X)
    record(X, F, V)
    gen = 0
    while counter.used < cfg.fe_budget:
        rank, crowd = rank_population(F, V, arities)
        n_off = min(N, cfg.fe_budget - counter.used)
        n_pairs = (n_off + 1) // 2
        parents = _tournament(rng, rank, crowd, V, 2 * n_pairs, cfg.tournament_size)
        C1, C2 = sbx_crossover(rng, X[parents[:n_pairs]], X[parents[n_pairs:]], lower, upper,
                               cfg.crossover_eta, cfg.crossover_prob)
        kids = np.vstack([C1, C2])[:n_off]
        kids = polynomial_mutation(rng, kids, lower, upper, cfg.mutation_eta, pm)
        KF, KV = counter.evaluate(kids)
        X, F, V = np.vstack([X, kids]), np.vstack([F, KF]), np.concatenate([V, KV])
        keep = environmental_selection(F, V, arities, N)
        X, F, V = X[keep], F[keep], V[keep]
        gen += 1
        if generation_hook is not None:
            generation_hook(gen, X, F, V)
        record(X, F, V)
    AX, AF = _archive_of(X, F, V, arities)
    return Archive(AX, AF, arities, counter.used, trace)


def run_random_search(problem: MPProblem, seed: int, fe_budget: int, monitor: Monitor | None = None,
                      batch: int = 1000, checkpoints: int = 10) -> Archive:
    """Uniform sampling in the bounds; keeps the feasible multiparty-nondominated subset."""
    if fe_budget < 1:
        raise ContractViolation("fe_budget must be at least 1")
    rng = np.random.default_rng(seed)
    lower, upper = problem.bounds.lower, problem.bounds.upper
    counter = _Counter(problem, fe_budget)
    AX = np.empty((0, problem.n))
    AF = np.empty((0, sum(problem.arities)))
    marks = _checkpoints(fe_budget, checkpoints)
    trace: list[dict] = []
    while counter.used < fe_budget:
        k = min(batch, fe_budget - counter.used)
        X = lower + rng.random((k, problem.n)) * (upper - lower)
        F, V = counter.evaluate(X)
        AX, AF = _archive_of(np.vstack([AX, X]), np.vstack([AF, F]),
                             np.concatenate([np.zeros(AX.shape[0]), V]), problem.arities)
        while marks and counter.used >= marks[0]:
            marks.pop(0)
            entry = {"fe": counter.used, "archive_size": int(AF.shape[0]), "objectives": AF.tolist()}
            if monitor is not None and AF.shape[0]:
                entry["metric"] = float(monitor(AF))
            trace.append(entry)
    return Archive(AX, AF, problem.arities, counter.used, trace)
