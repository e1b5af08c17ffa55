"""Optional numba acceleration for the geometry kernels.

Set ``TSDSM_DISABLE_NUMBA=1`` to force the vectorized numpy kernels even
when numba is importable.
"""
from __future__ import annotations

import os

DISABLE_FLAG = "TSDSM_DISABLE_NUMBA"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships in the dev image
    HAVE_NUMBA = False


def numba_requested() -> bool:
    return os.environ.get(DISABLE_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and numba_requested()
