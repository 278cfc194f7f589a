"""Backend selection for the hot kernels.

The compiled Cython extension is used when it imports cleanly; otherwise the
numpy fallback is used. Set ``MPMO_PURE_PYTHON=1`` to force the fallback.
"""

import os

from mpmo import _fallback

BACKEND = "python"

if os.environ.get("MPMO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from mpmo import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

nd_rank = _impl.nd_rank
mp_nd_mask = _impl.mp_nd_mask
igd_min_dist = _impl.igd_min_dist
mc_dominated_count = _impl.mc_dominated_count


def available_backends():
    """Map of backend name to kernel module for every importable backend."""
    out = {"python": _fallback}
    try:
        from mpmo import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
