"""Deterministic synthetic textures for desk-scale runs.

Both classes have nearly the same global power spectrum.  The stationary
class is noise spread evenly over a band; the chirped class is narrowband
noise whose local frequency sweeps across that band along the vertical
axis.  A classical wavelet transform sees similar spectra; a fractional
transform at the matching order undoes the sweep.
"""

from __future__ import annotations

import json
import math
from pathlib import Path as FsPath

import numpy as np

from . import io
from .grid import FractionalOrderPair, chirp

__all__ = [
    "band_limited_noise",
    "chirp_modulated_noise",
    "texture_pair",
    "make_fixture_set",
    "to_u8",
]

FIXTURE_ORDERS = FractionalOrderPair(1.0, 0.4)
#: Radius (rad/sample) of the narrowband source.
FIXTURE_RADIUS = 0.3


def _unit_rms(x: np.ndarray) -> np.ndarray:
    rms = math.sqrt(float(np.mean(x**2)))
    return x / rms if rms > 0 else x


def _freqs(shape):
    h, w = shape
    wy = 2 * math.pi * np.fft.fftfreq(h)[:, None]
    wx = 2 * math.pi * np.fft.fftfreq(w)[None, :]
    return wy, wx


def sweep_extent(orders: FractionalOrderPair) -> float:
    """Largest local vertical frequency (rad/sample) of the chirp."""
    return abs(orders.cotangents[1]) / 2


def band_limited_noise(shape, rng: np.random.Generator, orders=FIXTURE_ORDERS, radius=FIXTURE_RADIUS) -> np.ndarray:
    """Stationary noise, flat over ``|wx| <= radius``, ``|wy| <= radius + sweep``."""
    wy, wx = _freqs(shape)
    keep = (np.abs(wx) <= radius) & (np.abs(wy) <= radius + sweep_extent(orders))
    noise = rng.standard_normal(shape)
    return _unit_rms(np.fft.ifft2(np.fft.fft2(noise) * keep).real)


def chirp_modulated_noise(shape, rng, orders=FIXTURE_ORDERS, radius=FIXTURE_RADIUS) -> np.ndarray:
    """Real part of complex noise band-limited to ``|w| <= radius`` times a chirp."""
    h, w = shape
    wy, wx = _freqs(shape)
    keep = np.hypot(wy, wx) <= radius
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    base = np.fft.ifft2(np.fft.fft2(noise) * keep)
    return _unit_rms(np.real(base * chirp(w, h, orders, -1)))


def texture_pair(shape, seed: int, count: int):
    """``count`` stationary textures (label 0) and ``count`` chirped ones (label 1)."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for _ in range(count):
        images.append(band_limited_noise(shape, rng))
        labels.append(0)
    for _ in range(count):
        images.append(chirp_modulated_noise(shape, rng))
        labels.append(1)
    return images, labels


def to_u8(img: np.ndarray) -> np.ndarray:
    """Map a unit-RMS texture onto 8 bits (clipped at +-4 RMS)."""
    return np.clip(np.rint(128 + 31.75 * img), 0, 255).astype(np.uint8)


def make_fixture_set(directory, seed: int = 7, count: int = 4, size: int = 64, record_separation: bool = True) -> list[dict]:
    """Write ``2 * count`` textures as 8-bit PGMs plus ``manifest.json``.

    With ``record_separation`` the manifest also stores the first-order
    class separation measured on the written files.
    """
    directory = FsPath(directory)
    directory.mkdir(parents=True, exist_ok=True)
    images, labels = texture_pair((size, size), seed, count)
    entries = []
    for i, (img, lab) in enumerate(zip(images, labels)):
        name = f"texture_{i:02d}_{'chirp' if lab else 'stationary'}.pgm"
        io.write_pgm(directory / name, to_u8(img))
        entries.append({"image": name, "label": lab})
    manifest = {"seed": seed, "size": size, "images": entries}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if record_separation:
        sep = measure_separation(directory)
        best = max((v, k) for k, v in sep.items() if k != "(1,1)")
        manifest["first_order_separation"] = {
            "ratios": sep,
            "classical": sep["(1,1)"],
            "best_fractional": best[0],
            "best_order": best[1],
            "min_gain": MIN_GAIN,
        }
        (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return entries


#: Required ratio of the best fractional separation to the classical one.
MIN_GAIN = 1.10


def load_fixture_patches(directory):
    from .features import LabeledPatch

    directory = FsPath(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    return [
        LabeledPatch(io.read_pnm(directory / e["image"]).astype(np.float64), e["label"])
        for e in manifest["images"]
    ], manifest


def measure_separation(directory, order_grid=None) -> dict[str, float]:
    """Separation ratio of first-order features of the fixture images at
    each order setting (default: the 18-setting grid), keyed by ``str(order)``."""
    from .features import assemble_q, default_order_grid
    from .filterbank import FilterBankSpec, cached_bank
    from .scattering import enumerate_paths

    patches, manifest = load_fixture_patches(directory)
    size = manifest["size"]
    bank = cached_bank(FilterBankSpec(grid_width=size, grid_height=size, max_order=1))
    grid = default_order_grid() if order_grid is None else order_grid
    tensor = assemble_q(patches, bank, grid)
    first = [i for i, p in enumerate(enumerate_paths(bank.num_scales, bank.num_angles, 1)) if p.order == 1]
    out = {}
    for d, o in enumerate(tensor.order_grid):
        out[str(o)] = separation_ratio(tensor.order_slice(d)[:, first], tensor.labels)
    return out


def separation_ratio(features, labels) -> float:
    """Distance between the two class means over the mean distance of each
    sample to its own class mean."""
    F = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    classes = np.unique(y)
    if len(classes) != 2:
        raise ValueError(f"expected exactly 2 classes, got {len(classes)}")
    means = {c: F[y == c].mean(axis=0) for c in classes}
    between = float(np.linalg.norm(means[classes[0]] - means[classes[1]]))
    within = float(np.mean([np.linalg.norm(f - means[c]) for f, c in zip(F, y)]))
    return between / within
