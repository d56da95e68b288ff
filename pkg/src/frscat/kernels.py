"""Backend selection for the hot kernels.

The compiled extension is used when it was built and ``FRSC_PURE_PYTHON``
is unset or ``0``; otherwise the numpy fallback is used.  ``BACKEND`` names
the active choice.
"""

import os

from . import _pykernels

__all__ = [
    "BACKEND",
    "available_backends",
    "get_backend",
    "gather_multiply",
    "broadcast_multiply",
    "modulus_energy",
    "block_means",
    "directed_hausdorff",
    "contingency",
]

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels


def available_backends() -> list[str]:
    return list(_BACKENDS)


def get_backend(name: str):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; have {available_backends()}") from None


_force_python = os.environ.get("FRSC_PURE_PYTHON", "0") not in ("", "0")
BACKEND = "compiled" if (_ckernels is not None and not _force_python) else "python"
_active = _BACKENDS[BACKEND]

gather_multiply = _active.gather_multiply
broadcast_multiply = _active.broadcast_multiply
modulus_energy = _active.modulus_energy
block_means = _active.block_means
directed_hausdorff = _active.directed_hausdorff
contingency = _active.contingency
