"""Pure numpy implementations of the hot kernels.

Used when the compiled ``mpmo._kernels`` extension is unavailable or when
``MPMO_PURE_PYTHON=1`` is set. Every function here has the same signature and
output as its compiled counterpart.
"""

import numpy as np

_CHUNK = 256


def nd_rank(F):
    """Nondominated-sort ranks of the rows of ``F`` (minimization)."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    n = F.shape[0]
    # dom[i, j] is True when row i Pareto-dominates row j
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt
    count = dom.sum(axis=0)
    rank = np.full(n, -1, dtype=np.int64)
    front = np.flatnonzero(count == 0)
    r = 0
    while front.size:
        rank[front] = r
        count = count - dom[front].sum(axis=0)
        count[rank >= 0] = -1
        front = np.flatnonzero(count == 0)
        r += 1
    return rank


def _party_dominance(A, B, offsets):
    """Per-party dominance between every row of A and every row of B.

    Returns ``(a_dom_b, b_dom_a)``, boolean arrays of shape (len(A), len(B), M).
    """
    M = len(offsets) - 1
    a_dom_b = np.empty((A.shape[0], B.shape[0], M), dtype=bool)
    b_dom_a = np.empty_like(a_dom_b)
    for j in range(M):
        a = A[:, None, offsets[j]:offsets[j + 1]]
        b = B[None, :, offsets[j]:offsets[j + 1]]
        le = np.all(a <= b, axis=2)
        ge = np.all(a >= b, axis=2)
        neq = np.any(a != b, axis=2)
        a_dom_b[:, :, j] = le & neq
        b_dom_a[:, :, j] = ge & neq
    return a_dom_b, b_dom_a


def mp_nd_mask(F, offsets):
    """Boolean mask of rows not multiparty-dominated by any other row."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    n = F.shape[0]
    keep = np.ones(n, dtype=bool)
    for start in range(0, n, _CHUNK):
        block = F[start:start + _CHUNK]
        # rows of F (candidate dominators) against the block
        cand_dom, block_dom = _party_dominance(F, block, offsets)
        dominated = (~block_dom.any(axis=2)) & cand_dom.any(axis=2)
        keep[start:start + _CHUNK] = ~dominated.any(axis=0)
    return keep


def igd_min_dist(R, S, offsets):
    """For each row of R, the minimum over rows of S of the summed per-party distance."""
    R = np.ascontiguousarray(R, dtype=np.float64)
    S = np.ascontiguousarray(S, dtype=np.float64)
    M = len(offsets) - 1
    out = np.empty(R.shape[0])
    for start in range(0, R.shape[0], _CHUNK):
        block = R[start:start + _CHUNK]
        total = np.zeros((block.shape[0], S.shape[0]))
        for j in range(M):
            diff = block[:, None, offsets[j]:offsets[j + 1]] - S[None, :, offsets[j]:offsets[j + 1]]
            total += np.sqrt(np.sum(diff * diff, axis=2))
        out[start:start + _CHUNK] = total.min(axis=1)
    return out


def mc_dominated_count(samples, P):
    """Number of sample rows weakly dominated by at least one row of P."""
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    P = np.ascontiguousarray(P, dtype=np.float64)
    if P.shape[0] == 0:
        return 0
    count = 0
    step = max(1, 4_000_000 // max(1, P.shape[0] * P.shape[1]))
    for start in range(0, samples.shape[0], step):
        block = samples[start:start + step]
        hit = np.all(P[None, :, :] <= block[:, None, :], axis=2).any(axis=1)
        count += int(hit.sum())
    return count
