"""Fractional convolution and the fractional wavelet transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filterbank import FilterBank
from .grid import (
    FractionalOrderPair,
    as_complex_image,
    chirp,
    inverse_spectrum,
    spectrum,
)

__all__ = ["FrwtOutput", "frac_convolve", "plain_convolve", "frwt"]


@dataclass(frozen=True)
class FrwtOutput:
    """Channels of one transform: ``lowpass`` is (H, W), ``bandpass`` is (S, K, H, W)."""

    lowpass: np.ndarray
    bandpass: np.ndarray
    orders: FractionalOrderPair

    def energy(self) -> float:
        return float(np.sum(np.abs(self.lowpass) ** 2) + np.sum(np.abs(self.bandpass) ** 2))


def _check_filter(x: np.ndarray, h_hat) -> np.ndarray:
    h_hat = np.asarray(h_hat)
    if h_hat.shape[-2:] != x.shape:
        raise ValueError(
            f"dimension mismatch: signal is {x.shape[1]}x{x.shape[0]}, "
            f"filter is {h_hat.shape[-1]}x{h_hat.shape[-2]}"
        )
    return h_hat


def plain_convolve(x, h_hat) -> np.ndarray:
    """Circular convolution of ``x`` with the filter whose DFT is ``h_hat``."""
    x = as_complex_image(x)
    h_hat = _check_filter(x, h_hat)
    return inverse_spectrum(spectrum(x) * h_hat)


def modulate(x: np.ndarray, orders: FractionalOrderPair, sign: int = 1) -> np.ndarray:
    """Multiply by the chirp of the given sign; identity at the classical order."""
    if orders.is_classical:
        return x
    h, w = x.shape[-2:]
    return x * chirp(w, h, orders, sign)


def frac_convolve(x, h_hat, orders) -> np.ndarray:
    """Fractional convolution: chirp, convolve, then remove the chirp.

    ``h_hat`` may carry leading batch axes; the result then broadcasts.
    """
    orders = FractionalOrderPair.coerce(orders)
    x = as_complex_image(x)
    h_hat = _check_filter(x, h_hat)
    y = inverse_spectrum(spectrum(modulate(x, orders, +1)) * h_hat)
    return modulate(y, orders, -1)


def frwt(x, bank: FilterBank, orders) -> FrwtOutput:
    """All low-pass and band-pass channels from a single forward transform."""
    orders = FractionalOrderPair.coerce(orders)
    x = as_complex_image(x)
    if x.shape != bank.shape:
        raise ValueError(
            f"dimension mismatch: signal is {x.shape[1]}x{x.shape[0]}, "
            f"bank grid is {bank.shape[1]}x{bank.shape[0]}"
        )
    spec_x = spectrum(modulate(x, orders, +1))
    low = modulate(inverse_spectrum(spec_x * bank.phi_hat), orders, -1)
    band = modulate(inverse_spectrum(spec_x * bank.psi_hat), orders, -1)
    return FrwtOutput(lowpass=low, bandpass=band, orders=orders)
