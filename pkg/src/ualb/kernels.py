"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set ``UALB_PURE_PYTHON=1``
to force the numpy/pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("UALB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"
knapsack_max = _impl.knapsack_max
LoadEnumerator = _impl.LoadEnumerator


def backends() -> dict[str, object]:
    """All importable kernel modules, keyed by name."""
    out: dict[str, object] = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
