"""Time-parameterized basic functions BF1-BF6 and their Pareto-set samplers.

Each family is a 2- or 3-objective minimization problem whose objectives are
``d(x, t) * h(x1[, x2], t)``; ``d`` is a distance term equal to 1 exactly on
the Pareto set. ``t`` is fixed per decision maker.

All functions accept a single decision vector or an ``(N, n)`` batch.

Notes on reading the definitions:

* BF3's tail is a recurrence, ``x_i = cos(4t + x1 + x_{i-1})``; the sampler
  evaluates it for ``i = 2..n`` in ascending order.
* BF3's disconnection term uses ``1 / (2 * beta_t)``.
* BF6's penalty is ``|prod_j sin(floor(alpha_t * (2 x_j - r)) * pi / 2)|`` with
  floored ``mod`` for negative ``alpha_t``, so ``r`` is always 0 or 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mpmo.core import Bounds, ContractViolation, DimensionError

FAMILIES = ("BF1", "BF2", "BF3", "BF4", "BF5", "BF6")
N_OBJECTIVES = {"BF1": 2, "BF2": 2, "BF3": 2, "BF4": 3, "BF5": 3, "BF6": 3}
MIN_DIMENSION = {"BF1": 2, "BF2": 2, "BF3": 2, "BF4": 3, "BF5": 3, "BF6": 3}
N_FREE = {"BF1": 1, "BF2": 1, "BF3": 1, "BF4": 2, "BF5": 2, "BF6": 2}

_HALF_PI = 0.5 * math.pi


def family_name(family) -> str:
    if isinstance(family, int):
        family = f"BF{family}"
    family = str(family).upper()
    if family not in FAMILIES:
        raise ContractViolation(f"unknown basic function family {family!r}")
    return family


@dataclass(frozen=True)
class BFContext:
    """Time-derived parameters of one family at a fixed ``t``.

    Unused parameters are ``None``. BF3's ``alpha_t`` depends on ``x1`` and is
    computed by :func:`bf3_alpha` instead.
    """

    family: str
    t: float
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    r: float | None = None


def context(family, t: float) -> BFContext:
    family = family_name(family)
    t = float(t)
    if family == "BF1":
        return BFContext(family, t, alpha=5.0 * math.cos(_HALF_PI * t))
    if family == "BF2":
        return BFContext(family, t, alpha=2.25 + 2.0 * math.cos(2.0 * math.pi * t),
                         beta=1.0, gamma=math.sin(_HALF_PI * t))
    if family == "BF3":
        return BFContext(family, t, beta=float(1 + math.floor(10.0 * abs(math.sin(_HALF_PI * t)))))
    if family == "BF4":
        return BFContext(family, t, alpha=2.25 + 2.0 * math.cos(_HALF_PI * t),
                         beta=math.sin(_HALF_PI * t))
    if family == "BF5":
        return BFContext(family, t, alpha=abs(math.sin(_HALF_PI * t)))
    alpha = float(math.floor(10.0 * math.sin(math.pi * t)))
    # Python's % is floored, so mod(alpha, 2) is 0 or 1 even for negative alpha
    return BFContext(family, t, alpha=alpha, r=1.0 - (alpha % 2.0))


def bf_bounds(family, n: int) -> Bounds:
    family = family_name(family)
    if n < MIN_DIMENSION[family]:
        raise DimensionError(f"{family} needs n >= {MIN_DIMENSION[family]}, got {n}")
    lower = np.full(n, -1.0)
    upper = np.ones(n)
    if family == "BF1":
        lower[:] = 0.0
        lower[0], upper[0] = 1.0, 4.0
    elif family in ("BF2", "BF3"):
        lower[0] = 0.0
    elif family in ("BF4", "BF6"):
        lower[:2] = 0.0
    else:
        lower[:] = 0.0
    return Bounds(lower, upper)


def _as_batch(x):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    return np.atleast_2d(X), single


def bf3_alpha(x1, beta: float):
    return np.maximum(0.0, (1.0 / (2.0 * beta) + 0.1) * np.sin(2.0 * beta * math.pi * x1))


def _bf6_penalty(X, ctx: BFContext):
    k = np.floor(ctx.alpha * (2.0 * X[:, :2] - ctx.r))
    return np.abs(np.prod(np.sin(k * _HALF_PI), axis=1))


def _tail_target(family: str, X, ctx: BFContext):
    """Pareto-set value of every tail variable, shape (N, n - n_free)."""
    x1 = X[:, :1]
    if family == "BF1":
        return np.broadcast_to(1.0 / (1.0 + np.exp(ctx.alpha * (x1 - 2.5))), (X.shape[0], X.shape[1] - 1))
    if family == "BF2":
        target = ctx.gamma * np.sin(4.0 * math.pi * x1 ** ctx.beta) / (1.0 + abs(ctx.gamma))
        return np.broadcast_to(target, (X.shape[0], X.shape[1] - 1))
    if family == "BF3":
        return np.cos(4.0 * ctx.t + x1 + X[:, :-1])
    if family == "BF4":
        target = np.sin(2.0 * math.pi * (X[:, :1] + X[:, 1:2])) / (1.0 + abs(ctx.beta))
    elif family == "BF5":
        target = 0.5 * ctx.alpha * x1
    else:
        target = np.sin(ctx.t * x1)
    return np.broadcast_to(target, (X.shape[0], X.shape[1] - 2))


def bf_distance(family, x, t: float):
    """Distance term ``d(x, t)``; 1 on the Pareto set, larger elsewhere."""
    family = family_name(family)
    X, single = _as_batch(x)
    if X.shape[1] < MIN_DIMENSION[family]:
        raise DimensionError(f"{family} needs n >= {MIN_DIMENSION[family]}")
    ctx = context(family, t)
    tail = X[:, N_FREE[family]:]
    d = 1.0 + np.sum((tail - _tail_target(family, X, ctx)) ** 2, axis=1)
    if family == "BF6":
        d = d + _bf6_penalty(X, ctx)
    return float(d[0]) if single else d


def bf_evaluate(family, x, t: float):
    """Objective vector(s) of ``family`` at time ``t``."""
    family = family_name(family)
    X, single = _as_batch(x)
    ctx = context(family, t)
    d = np.atleast_1d(bf_distance(family, X, t))
    x1 = X[:, 0]
    if family == "BF1":
        F = np.column_stack([d * (1.0 + t) / x1, d * x1 / (1.0 + t)])
    elif family == "BF2":
        wave = 0.1 * np.sin(3.0 * math.pi * x1)
        base = np.maximum(1.0 - x1 + wave, 0.0)
        F = np.column_stack([d * (x1 + wave), d * base ** ctx.alpha])
    elif family == "BF3":
        a = bf3_alpha(x1, ctx.beta)
        F = np.column_stack([d * (x1 + a), d * (1.0 - x1 + a)])
    elif family == "BF4":
        s1, c1 = np.sin(_HALF_PI * x1), np.cos(_HALF_PI * x1)
        s2, c2 = np.sin(_HALF_PI * X[:, 1]), np.cos(_HALF_PI * X[:, 1])
        # clamp the ~1e-17 negative round-off of cos(pi/2) before the real power
        F = np.column_stack([
            d * np.maximum(s1, 0.0) ** ctx.alpha,
            d * np.maximum(s2 * c1, 0.0) ** ctx.alpha,
            d * np.maximum(c2 * c1, 0.0) ** ctx.alpha,
        ])
    elif family == "BF5":
        y = math.pi / 6.0 * ctx.alpha + (_HALF_PI - math.pi / 3.0 * ctx.alpha) * X[:, :2]
        F = np.column_stack([
            d * np.sin(y[:, 0]),
            d * np.sin(y[:, 1]) * np.cos(y[:, 0]),
            d * np.cos(y[:, 1]) * np.cos(y[:, 0]),
        ])
    else:
        c1, s1 = np.cos(_HALF_PI * x1), np.sin(_HALF_PI * x1)
        c2, s2 = np.cos(_HALF_PI * X[:, 1]), np.sin(_HALF_PI * X[:, 1])
        F = np.column_stack([d * c1 * c2, d * c1 * s2, d * s1])
    return F[0] if single else F


def _bf3_free_values(count: int, beta: float) -> np.ndarray:
    # {0} plus count-1 points spread evenly over the beta intervals by arc length
    if count == 1:
        return np.zeros(1)
    beta = int(beta)
    width = 1.0 / (2.0 * beta)
    s = np.linspace(0.0, beta * width, count - 1)
    idx = np.minimum(np.floor(s / width), beta - 1)
    starts = (2.0 * (idx + 1.0) - 1.0) / (2.0 * beta)
    vals = np.minimum(starts + (s - idx * width), (idx + 1.0) / beta)
    return np.concatenate([[0.0], vals])


def _bf6_valid(free, ctx: BFContext) -> np.ndarray:
    k = np.abs(np.floor(ctx.alpha * (2.0 * free - ctx.r)))
    return np.prod(np.mod(k, 2.0), axis=1) == 0


def _grid(side: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    axes = [np.linspace(lo[i], hi[i], side) for i in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _free_samples(family: str, ctx: BFContext, count: int, rng, bounds: Bounds) -> np.ndarray:
    n_free = N_FREE[family]
    lo, hi = bounds.lower[:n_free], bounds.upper[:n_free]
    if family == "BF3":
        return _bf3_free_values(count, ctx.beta)[:, None]
    side = 1 if count == 1 else max(2, math.ceil(count ** (1.0 / n_free)))
    while True:
        free = _grid(side, lo, hi) if side > 1 else ((lo + hi) / 2.0)[None, :]
        if family == "BF6":
            free = free[_bf6_valid(free, ctx)]
        if free.shape[0] >= count:
            break
        side += max(1, side // 4)
    if free.shape[0] > count:
        keep = np.sort(rng.choice(free.shape[0], size=count, replace=False))
        free = free[keep]
    return free


def bf_ps_sample(family, t: float, count: int, seed: int = 0, n: int | None = None) -> np.ndarray:
    """``count`` decision vectors on the analytic Pareto set, shape (count, n).

    Free variables come from a uniform grid over their feasible set (BF3's
    union of intervals plus ``x1 = 0``; BF6's parity-filtered square). When
    the grid has more points than requested, a subset is drawn with ``seed``.
    """
    family = family_name(family)
    if count < 1:
        raise ContractViolation("count must be at least 1")
    if n is None:
        n = MIN_DIMENSION[family]
    bounds = bf_bounds(family, n)
    ctx = context(family, t)
    rng = np.random.default_rng(seed)
    free = _free_samples(family, ctx, count, rng, bounds)
    X = np.zeros((free.shape[0], n))
    n_free = free.shape[1]
    X[:, :n_free] = free
    if family == "BF3":
        for i in range(1, n):
            X[:, i] = np.cos(4.0 * ctx.t + X[:, 0] + X[:, i - 1])
    else:
        X[:, n_free:] = _tail_target(family, X, ctx)
    return X
