"""The eleven MPMOPs E1-E11 and their multiparty reference fronts."""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mpmo.bf import N_OBJECTIVES, bf_bounds, bf_evaluate, bf_ps_sample
from mpmo.core import ContractViolation, MPProblem, mp_nondominated_mask

# (family, t) per party; E8/E10/E11 parties are sequential despite duplicated labels
SUITE = {
    "E1": (("BF1", 1.0), ("BF1", 2.0)),
    "E2": (("BF2", 0.0), ("BF2", 3.0)),
    "E3": (("BF3", 0.0), ("BF3", math.pi / 2)),
    "E4": (("BF4", 0.0), ("BF4", 1.0)),
    "E5": (("BF5", 0.0), ("BF5", 1.5)),
    "E6": (("BF6", 0.0), ("BF6", 1.0)),
    "E7": (("BF1", 0.0), ("BF1", 1.0), ("BF1", 2.0)),
    "E8": (("BF2", 0.0), ("BF2", 1.0), ("BF2", 3.0)),
    "E9": (("BF4", 0.0), ("BF4", 0.5), ("BF4", 1.0)),
    "E10": (("BF5", 0.0), ("BF5", 1.0), ("BF5", 1.5)),
    "E11": (("BF6", 0.0), ("BF6", 1.0), ("BF6", 1.5)),
}
PROBLEM_IDS = tuple(SUITE)
DIMENSIONS = (10, 30, 50)
DEFAULT_RESOLUTION = 10_000
FRONT_FORMAT_VERSION = 1


def _check_id(problem_id: str) -> str:
    pid = str(problem_id).upper()
    if pid not in SUITE:
        raise ContractViolation(f"unknown suite problem {problem_id!r}")
    return pid


def make_suite_problem(problem_id: str, n: int) -> MPProblem:
    pid = _check_id(problem_id)
    parties = SUITE[pid]
    family = parties[0][0]
    bounds = bf_bounds(family, n)
    arities = tuple(N_OBJECTIVES[f] for f, _ in parties)

    def evaluate(X):
        return np.hstack([bf_evaluate(f, X, t) for f, t in parties])

    def sample_ps(count, seed):
        return np.vstack([bf_ps_sample(f, t, count, seed, n) for f, t in parties])

    return MPProblem(
        id=pid,
        n=n,
        arities=arities,
        bounds=bounds,
        batch_evaluator=evaluate,
        ps_sampler=sample_ps,
        metadata={"suite": "E", "parties": [list(p) for p in parties]},
    )


@dataclass
class ReferenceFront:
    problem_id: str
    n: int
    arities: tuple[int, ...]
    points: np.ndarray  # flat layout, one row per reference solution
    resolution: int
    seed: int
    decisions: np.ndarray | None = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return len(self.arities)

    @property
    def version_id(self) -> str:
        h = hashlib.sha256(np.ascontiguousarray(self.points).tobytes()).hexdigest()[:12]
        return f"{self.problem_id}-d{self.n}-r{self.resolution}-s{self.seed}-v{FRONT_FORMAT_VERSION}-{h}"


def build_reference_front(problem_id: str, n: int, resolution: int = DEFAULT_RESOLUTION,
                          seed: int = 0) -> ReferenceFront:
    """Multiparty-nondominated subset of the union of every party's Pareto-set samples."""
    if resolution < 100:
        raise ContractViolation("resolution must be at least 100")
    problem = make_suite_problem(problem_id, n)
    candidates = problem.ps_sampler(resolution, seed)
    candidates = np.unique(candidates, axis=0)
    F = problem.evaluate_batch(candidates)
    keep = mp_nondominated_mask(F, problem.arities)
    if not keep.any():
        raise RuntimeError(f"reference front for {problem.id} came out empty")
    return ReferenceFront(problem.id, n, problem.arities, F[keep], resolution, seed, candidates[keep])


def write_front(front: ReferenceFront, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arities = ",".join(str(a) for a in front.arities)
    header = (f"{front.problem_id} M={front.M} arities={arities} n={front.n} "
              f"resolution={front.resolution} seed={front.seed} version={FRONT_FORMAT_VERSION}")
    np.savetxt(path, front.points, fmt="%.17g", header=header, comments="# ")
    return path


def read_front(path) -> ReferenceFront:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    if not header.startswith("# "):
        raise ContractViolation(f"{path}: missing reference-front header")
    tokens = header[2:].split()
    meta = dict(tok.split("=", 1) for tok in tokens[1:])
    arities = tuple(int(a) for a in meta["arities"].split(","))
    if int(meta["M"]) != len(arities):
        raise ContractViolation(f"{path}: M does not match arities")
    points = np.loadtxt(path, comments="#", ndmin=2)
    if points.shape[1] != sum(arities):
        raise ContractViolation(f"{path}: expected {sum(arities)} columns, got {points.shape[1]}")
    return ReferenceFront(tokens[0], int(meta["n"]), arities, points,
                          int(meta["resolution"]), int(meta["seed"]))


def default_cache_dir() -> Path:
    return Path(os.environ.get("MPMO_CACHE", Path.home() / ".cache" / "mpmo")) / "fronts"


def front_path(cache_dir, problem_id: str, n: int, resolution: int, seed: int) -> Path:
    return Path(cache_dir) / f"{problem_id}_d{n}_r{resolution}_s{seed}_v{FRONT_FORMAT_VERSION}.txt"


def load_or_build_front(problem_id: str, n: int, resolution: int = DEFAULT_RESOLUTION, seed: int = 0,
                        cache_dir=None) -> ReferenceFront:
    """Read the versioned front file if present, else build and persist it."""
    pid = _check_id(problem_id)
    cache_dir = default_cache_dir() if cache_dir is None else Path(cache_dir)
    path = front_path(cache_dir, pid, n, resolution, seed)
    if path.exists():
        return read_front(path)
    front = build_reference_front(pid, n, resolution, seed)
    write_front(front, path)
    # round-trip through text so in-memory and on-disk fronts are identical
    return read_front(path)


def is_filter_fixpoint(front: ReferenceFront) -> bool:
    return bool(np.all(mp_nondominated_mask(front.points, front.arities)))

