"""Backend dispatch for the hot geometry kernels."""
from __future__ import annotations

from types import ModuleType

from .. import _accel
from . import _kernels_numpy

BACKENDS: dict[str, ModuleType] = {"numpy": _kernels_numpy}
if _accel.HAVE_NUMBA:
    from . import _kernels_numba

    BACKENDS["numba"] = _kernels_numba

ACTIVE = "numba" if _accel.USE_NUMBA else "numpy"


def get(name: str | None = None) -> ModuleType:
    name = ACTIVE if name is None else name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
