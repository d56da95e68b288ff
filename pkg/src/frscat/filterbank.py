"""Morlet band-pass family, Gaussian low-pass and the Littlewood-Paley check."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

__all__ = [
    "FilterBankSpec",
    "FilterBank",
    "LPReport",
    "build_morlet_bank",
    "cached_bank",
    "gabor_2d",
    "gaussian_2d",
    "littlewood_paley",
    "lp_sum",
]

#: Center frequency (rad/sample) of the finest band-pass atom.
XI_FINEST = 3 * math.pi / 4
#: Fraction of the Nyquist radius over which the lower frame bound is measured.
LP_DISC_FRACTION = 7 / 8


@dataclass(frozen=True)
class FilterBankSpec:
    num_scales: int = 5
    num_angles: int = 8
    sigma_phi: float = 0.7
    sigma_psi: float = 0.5
    grid_width: int = 64
    grid_height: int = 64
    max_order: int = 2

    def __post_init__(self):
        if int(self.num_scales) < 1:
            raise ValueError(f"num_scales must be >= 1, got {self.num_scales}")
        if int(self.num_angles) < 1:
            raise ValueError(f"num_angles must be >= 1, got {self.num_angles}")
        if not self.sigma_phi > 0 or not self.sigma_psi > 0:
            raise ValueError("sigma_phi and sigma_psi must be positive")
        if int(self.max_order) < 0:
            raise ValueError(f"max_order must be >= 0, got {self.max_order}")
        if int(self.grid_width) < 1 or int(self.grid_height) < 1:
            raise ValueError("grid dimensions must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.grid_height), int(self.grid_width))

    def check_grid(self) -> None:
        """Raise if the grid cannot resolve the coarsest band-pass scale."""
        coarsest = 2 ** (self.num_scales - 1)
        limit = min(self.grid_width, self.grid_height) / 4
        if coarsest > limit:
            raise ValueError(
                f"grid {self.grid_width}x{self.grid_height} too small for "
                f"num_scales={self.num_scales}: need 2**(S-1)={coarsest} <= "
                f"min(width, height)/4={limit:g}"
            )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FilterBank:
    """Frequency responses on the unshifted DFT grid.

    ``psi_hat`` has shape ``(S, K, H, W)``; ``phi_hat`` has shape ``(H, W)``.
    Filtering is ``ifft2(fft2(x) * h_hat)`` with matching normalizations.
    """

    phi_hat: np.ndarray
    psi_hat: np.ndarray
    spec: FilterBankSpec
    scale_factor: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi_hat.shape

    @property
    def num_scales(self) -> int:
        return self.psi_hat.shape[0]

    @property
    def num_angles(self) -> int:
        return self.psi_hat.shape[1]

    def atom(self, j: int, k: int) -> np.ndarray:
        return self.psi_hat[j, k]


@dataclass(frozen=True)
class LPReport:
    min_sum: float
    max_sum: float
    epsilon: float

    def to_dict(self) -> dict:
        return asdict(self)


def _periodized_coords(n: int, sigma: float) -> np.ndarray:
    # Enough images of the grid that the Gaussian tails wrap below 1e-12.
    tiles = int(math.ceil(8 * sigma / n)) + 1
    base = np.arange(n, dtype=np.float64)
    base = np.where(base >= (n + 1) // 2, base - n, base)
    return np.stack([base + t * n for t in range(-tiles, tiles + 1)])


def gabor_2d(height, width, sigma, theta, xi, slant=1.0) -> np.ndarray:
    """Periodized spatial Gabor atom centered at the origin.

    The envelope has standard deviation ``sigma`` along the direction
    ``theta`` (counter-clockwise from the horizontal axis) and
    ``sigma / slant`` across it; the carrier has frequency ``xi`` along
    ``theta``.
    """
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    curv = rot @ np.diag([1.0, slant**2]) @ rot.T / (2 * sigma**2)
    reach = sigma * max(1.0, 1.0 / slant)
    ys = _periodized_coords(height, reach)
    xs = _periodized_coords(width, reach)
    out = np.zeros((height, width), dtype=np.complex128)
    for yy in ys:
        for xx in xs:
            X, Y = np.meshgrid(xx, yy)
            arg = -(curv[0, 0] * X * X + 2 * curv[0, 1] * X * Y + curv[1, 1] * Y * Y)
            arg = arg + 1j * xi * (c * X + s * Y)
            out += np.exp(arg)
    return out * (slant / (2 * math.pi * sigma**2))


def morlet_2d(height, width, sigma, theta, xi, slant=1.0) -> np.ndarray:
    """Gabor atom minus a multiple of its envelope so the atom sums to zero."""
    wave = gabor_2d(height, width, sigma, theta, xi, slant)
    env = gabor_2d(height, width, sigma, theta, 0.0, slant)
    return wave - (wave.sum() / env.sum()) * env


def gaussian_2d(height, width, sigma) -> np.ndarray:
    """Periodized isotropic Gaussian with unit sum."""
    g = gabor_2d(height, width, sigma, 0.0, 0.0).real
    return g / g.sum()


def build_morlet_bank(spec: FilterBankSpec) -> FilterBank:
    spec.check_grid()
    h, w = spec.shape
    S, K = int(spec.num_scales), int(spec.num_angles)
    slant = 4.0 / K
    psi = np.empty((S, K, h, w), dtype=np.complex128)
    for j in range(S):
        for k in range(K):
            atom = morlet_2d(
                h, w, spec.sigma_psi * 2**j, k * math.pi / K, XI_FINEST / 2**j, slant
            )
            psi[j, k] = scipy.fft.fft2(atom)
            # the DC term is a sum of cancelling terms; clean the rounding
            psi[j, k, 0, 0] = 0.0
    phi = scipy.fft.fft2(gaussian_2d(h, w, spec.sigma_phi * 2**S))
    phi = phi.real.astype(np.complex128)
    raw_max = float(lp_sum(phi, psi).max())
    scale = 1.0 / math.sqrt(raw_max)
    phi *= scale
    psi *= scale
    phi.setflags(write=False)
    psi.setflags(write=False)
    return FilterBank(phi_hat=phi, psi_hat=psi, spec=spec, scale_factor=scale)


@lru_cache(maxsize=16)
def cached_bank(spec: FilterBankSpec) -> FilterBank:
    """Memoized :func:`build_morlet_bank`; banks are immutable."""
    return build_morlet_bank(spec)


def reflect(h_hat: np.ndarray) -> np.ndarray:
    """``h_hat(-omega)`` on the unshifted DFT grid (last two axes)."""
    return np.roll(np.flip(h_hat, axis=(-2, -1)), shift=(1, 1), axis=(-2, -1))


def lp_sum(phi_hat, psi_hat) -> np.ndarray:
    """``|phi(w)|^2 + sum_jk |psi_jk(w)|^2`` at every DFT frequency.

    No mirrored atoms are added: chirp-modulated inputs are complex, so
    both half-planes must be bounded by the one-sided sum.  For a real
    input the effective weight is the average of ``lp(w)`` and ``lp(-w)``,
    which obeys the same bounds.
    """
    total = np.abs(np.asarray(phi_hat)) ** 2
    if psi_hat is not None and np.size(psi_hat):
        p2 = np.abs(np.asarray(psi_hat)) ** 2
        total = total + p2.reshape((-1,) + p2.shape[-2:]).sum(axis=0)
    return total


def lp_disc(shape) -> np.ndarray:
    """Boolean mask of DFT frequencies with ``|omega| <= 7/8 * pi`` rad/sample."""
    h, w = shape
    wy = 2 * math.pi * np.fft.fftfreq(h)
    wx = 2 * math.pi * np.fft.fftfreq(w)
    r = np.hypot(wy[:, None], wx[None, :])
    return r <= LP_DISC_FRACTION * math.pi + 1e-12


def littlewood_paley(bank: FilterBank) -> LPReport:
    lp = lp_sum(bank.phi_hat, bank.psi_hat)
    inside = lp[lp_disc(bank.shape)]
    lo = float(inside.min())
    hi = float(lp.max())
    return LPReport(min_sum=lo, max_sum=hi, epsilon=1.0 - lo)
