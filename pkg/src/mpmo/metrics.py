"""MPIGD and MPHV scoring.

MPHV is reported as the sum of per-party hypervolumes (the scored default);
``MetricReport.extra["average"]`` carries the per-party mean as well. Both
conventions rank algorithms identically for a fixed party count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mpmo import kernels
from mpmo.core import ContractViolation, flatten_population, mp_nondominated_mask, offsets_of

HV_REFERENCE = 1.1
MC_SAMPLES = 1_000_000


@dataclass
class MetricReport:
    metric_name: str
    value: float
    reference_id: str = ""
    normalization_bounds: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "value": self.value,
            "reference_id": self.reference_id,
            "normalization_bounds": self.normalization_bounds,
            "extra": self.extra,
        }


def mpigd(reference, obtained, arities=None) -> float:
    """Mean over reference solutions of the closest summed per-party distance.

    ``reference`` is a :class:`~mpmo.suite.ReferenceFront` or a flat array
    (then ``arities`` is required); ``obtained`` is a flat array or a list of
    per-party objective lists with the same structure.
    """
    if hasattr(reference, "points"):
        ref_arities = tuple(reference.arities)
        R = np.asarray(reference.points, dtype=float)
    else:
        if arities is None:
            raise ContractViolation("arities are required with a flat reference array")
        ref_arities = tuple(arities)
        R = np.asarray(reference, dtype=float)
    S, s_arities = flatten_population(obtained, ref_arities if isinstance(obtained, np.ndarray) else None)
    if S.shape[0] == 0:
        raise ContractViolation("obtained set is empty")
    if tuple(s_arities) != ref_arities:
        raise ContractViolation(f"party structure {s_arities} does not match reference {ref_arities}")
    if R.shape[0] == 0:
        raise ContractViolation("reference front is empty")
    return float(np.mean(kernels.igd_min_dist(R, S, offsets_of(ref_arities))))


def hv2d(points, ref=(1.0, 1.0)) -> float:
    """Exact area dominated by 2-D ``points`` and bounded by ``ref``."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    r1, r2 = float(ref[0]), float(ref[1])
    P = P[(P[:, 0] < r1) & (P[:, 1] < r2)]
    if P.shape[0] == 0:
        return 0.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    area = 0.0
    y_prev = r2
    for x, y in P:
        if y < y_prev:
            area += (r1 - x) * (y_prev - y)
            y_prev = y
    return float(area)


def _mc_box(P, ref):
    ref = np.asarray(ref, dtype=float)
    lower = np.minimum(0.0, P.min(axis=0)) if P.shape[0] else np.zeros_like(ref)
    return lower, ref


def hv_monte_carlo(points, ref, samples: int = MC_SAMPLES, seed: int = 0) -> float:
    """Hypervolume estimate from ``samples`` uniform draws in the box below ``ref``.

    The box is ``[0, ref]``, extended downward if any point has a negative
    coordinate.
    """
    ref = np.asarray(ref, dtype=float)
    P = np.asarray(points, dtype=float).reshape(-1, ref.size)
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    lower, upper = _mc_box(P, ref)
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        k = min(200_000, samples - done)
        Z = lower + rng.random((k, ref.size)) * (upper - lower)
        hits += kernels.mc_dominated_count(Z, P)
        done += k
    return float(np.prod(upper - lower) * hits / samples)


def mc_standard_error(estimate: float, box_volume: float, samples: int) -> float:
    p = min(max(estimate / box_volume, 0.0), 1.0)
    return float(box_volume * np.sqrt(p * (1.0 - p) / samples))


@dataclass
class NormalizationBounds:
    arities: tuple[int, ...]
    ideal: np.ndarray  # flat layout
    nadir: np.ndarray

    def apply(self, F) -> np.ndarray:
        F = np.asarray(F, dtype=float)
        span = self.nadir - self.ideal
        out = np.zeros_like(F)
        ok = span > 0
        out[..., ok] = (F[..., ok] - self.ideal[ok]) / span[ok]
        return out

    def to_dict(self) -> dict:
        return {"arities": list(self.arities), "ideal": self.ideal.tolist(), "nadir": self.nadir.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationBounds":
        return cls(tuple(d["arities"]), np.asarray(d["ideal"], dtype=float), np.asarray(d["nadir"], dtype=float))


def normalization_bounds(sets, arities) -> NormalizationBounds:
    """Per-objective ideal/nadir over the multiparty-nondominated union of ``sets``."""
    arities = tuple(arities)
    nonempty = [np.asarray(s, dtype=float).reshape(-1, sum(arities)) for s in sets]
    nonempty = [s for s in nonempty if s.shape[0]]
    if not nonempty:
        raise ContractViolation("normalization needs at least one non-empty set")
    union = np.vstack(nonempty)
    front = union[mp_nondominated_mask(union, arities)]
    return NormalizationBounds(arities, front.min(axis=0), front.max(axis=0))


def normalize_sets(sets, arities):
    """Normalize every set with bounds shared across all of them.

    Returns ``(normalized_sets, bounds)``. A degenerate objective (nadir equal
    to ideal) maps to 0.
    """
    bounds = normalization_bounds(sets, arities)
    out = [bounds.apply(np.asarray(s, dtype=float).reshape(-1, sum(bounds.arities))) for s in sets]
    return out, bounds


def party_hypervolumes(F, arities, ref: float = HV_REFERENCE, samples: int = MC_SAMPLES,
                       seed: int = 0) -> np.ndarray:
    """HV of each party's objectives of a normalized flat set."""
    arities = tuple(arities)
    F = np.asarray(F, dtype=float).reshape(-1, sum(arities))
    off = offsets_of(arities)
    out = np.zeros(len(arities))
    for j, m in enumerate(arities):
        P = F[:, off[j]:off[j + 1]]
        r = np.full(m, ref)
        if P.shape[0] == 0:
            continue
        if m == 2:
            out[j] = hv2d(P, r)
        else:
            out[j] = hv_monte_carlo(P, r, samples, seed + j)
    return out


def mphv(F, arities, ref: float = HV_REFERENCE, samples: int = MC_SAMPLES, seed: int = 0) -> float:
    """Sum of per-party hypervolumes of a normalized set."""
    return float(np.sum(party_hypervolumes(F, arities, ref, samples, seed)))


def mphv_report(F, bounds: NormalizationBounds, ref: float = HV_REFERENCE, samples: int = MC_SAMPLES,
                seed: int = 0, reference_id: str = "") -> MetricReport:
    """Normalize a raw flat set with ``bounds`` and report MPHV (sum and average)."""
    hv = party_hypervolumes(bounds.apply(F), bounds.arities, ref, samples, seed)
    total = float(hv.sum())
    return MetricReport("MPHV", total, reference_id, bounds.to_dict(),
                        {"average": total / len(bounds.arities), "per_party": hv.tolist()})
