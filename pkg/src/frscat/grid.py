"""Two-dimensional sample grids, chirps and unitary spectra.

Images are plain numpy arrays of shape ``(height, width)``: ``complex128``
for complex images and ``float64`` for real ones.  The first fractional
order acts along the horizontal (width) axis and the second along the
vertical (height) axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

__all__ = [
    "FractionalOrderPair",
    "as_complex_image",
    "as_real_image",
    "chirp",
    "chirp_coordinates",
    "modulus",
    "spectrum",
    "inverse_spectrum",
    "energy",
]


@dataclass(frozen=True, order=True)
class FractionalOrderPair:
    """Fractional orders ``(alpha1, alpha2)``, each strictly inside (0, 2).

    The rotation angles are ``theta_i = alpha_i * pi / 2``.
    """

    alpha1: float
    alpha2: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            a = float(getattr(self, name))
            if not math.isfinite(a) or not 0.0 < a < 2.0:
                raise ValueError(
                    f"{name}={a!r} outside (0, 2): cot(alpha*pi/2) is undefined "
                    "at theta in {0, pi}"
                )
            object.__setattr__(self, name, a)

    @property
    def thetas(self) -> tuple[float, float]:
        return (self.alpha1 * math.pi / 2, self.alpha2 * math.pi / 2)

    @property
    def cotangents(self) -> tuple[float, float]:
        """``cot(theta)`` for each axis; exactly zero at alpha == 1."""
        return tuple(_cot_half_pi(a) for a in (self.alpha1, self.alpha2))

    @property
    def is_classical(self) -> bool:
        return self.alpha1 == 1.0 and self.alpha2 == 1.0

    def __str__(self) -> str:
        return f"({self.alpha1:g},{self.alpha2:g})"

    @classmethod
    def coerce(cls, value) -> "FractionalOrderPair":
        if isinstance(value, cls):
            return value
        a1, a2 = value
        return cls(float(a1), float(a2))


def _cot_half_pi(alpha: float) -> float:
    # cos(pi/2) is 6e-17 in floating point; the identity case must be exact.
    if alpha == 1.0:
        return 0.0
    theta = alpha * math.pi / 2
    return math.cos(theta) / math.sin(theta)


def as_complex_image(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2D array, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def as_real_image(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        raise TypeError(f"{name} must be real-valued")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2D array, got shape {arr.shape}")
    arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def chirp_coordinates(n: int) -> np.ndarray:
    """Normalized sample positions ``(k - n//2) / sqrt(n)`` for ``k < n``."""
    if n < 1:
        raise ValueError(f"grid size must be >= 1, got {n}")
    return (np.arange(n, dtype=np.float64) - n // 2) / math.sqrt(n)


@lru_cache(maxsize=256)
def _chirp_cached(width: int, height: int, cot1: float, cot2: float, sign: int) -> np.ndarray:
    u1 = chirp_coordinates(width)
    u2 = chirp_coordinates(height)
    phase = 0.5 * sign * (cot2 * u2[:, None] ** 2 + cot1 * u1[None, :] ** 2)
    out = np.exp(1j * phase)
    out.setflags(write=False)
    return out


def chirp(width: int, height: int, orders, sign: int = 1) -> np.ndarray:
    """Separable unit-modulus chirp ``exp(sign * j/2 * (u1^2 cot t1 + u2^2 cot t2))``.

    The returned array is cached and read-only; copy it before mutating.
    """
    orders = FractionalOrderPair.coerce(orders)
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if width < 1 or height < 1:
        raise ValueError(f"chirp dimensions must be positive, got {width}x{height}")
    cot1, cot2 = orders.cotangents
    return _chirp_cached(int(width), int(height), cot1, cot2, int(sign))


def modulus(x) -> np.ndarray:
    """Pointwise magnitude ``sqrt(re^2 + im^2)``."""
    return np.abs(np.asarray(x))


def spectrum(x, overwrite_x: bool = False) -> np.ndarray:
    """Unitary 2D DFT over the last two axes."""
    return scipy.fft.fft2(x, norm="ortho", overwrite_x=overwrite_x)


def inverse_spectrum(X, overwrite_x: bool = False) -> np.ndarray:
    return scipy.fft.ifft2(X, norm="ortho", overwrite_x=overwrite_x)


def energy(x) -> float:
    """Squared L2 norm."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return float(np.sum(x.real**2 + x.imag**2))
    return float(np.sum(x * x))
