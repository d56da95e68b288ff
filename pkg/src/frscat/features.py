"""Patch extraction, normalization and the feature tensor Q (L x N x D)."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from . import io
from .filterbank import FilterBank
from .grid import FractionalOrderPair
from .scattering import count_paths, enumerate_paths, scatter_reduce

__all__ = [
    "ORDER_VALUES",
    "default_order_grid",
    "LabeledPatch",
    "FeatureTensor",
    "extract_patches",
    "normalize_patch",
    "assemble_q",
    "save_tensor",
    "load_tensor",
    "thread_count",
]

#: Fractional orders swept along one axis while the other stays at 1.
ORDER_VALUES = (0.05, 0.10, 0.40, 0.70, 1.00, 1.30, 1.60, 1.90, 1.95)

TARGET = 1
BACKGROUND = 0


def default_order_grid() -> list[FractionalOrderPair]:
    """The 18 settings: ``(1, a)`` for each value, then ``(a, 1)``."""
    return [FractionalOrderPair(1.0, a) for a in ORDER_VALUES] + [
        FractionalOrderPair(a, 1.0) for a in ORDER_VALUES
    ]


def thread_count() -> int:
    """Worker cap from ``FRSC_THREADS`` (absent or invalid: all cores)."""
    raw = os.environ.get("FRSC_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"FRSC_THREADS must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"FRSC_THREADS must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


@dataclass
class LabeledPatch:
    """``pixels`` has shape (C, h, w); ``source`` is (image id, x, y) of the center."""

    pixels: np.ndarray
    label: int
    source: tuple = (0, 0, 0)

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim == 2:
            px = px[None]
        if px.ndim != 3 or 0 in px.shape:
            raise ValueError(f"patch pixels must be (C, h, w), got {px.shape}")
        if int(self.label) < 0:
            raise ValueError(f"label must be >= 0, got {self.label}")
        self.pixels = px
        self.label = int(self.label)

    @property
    def channels(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[1:]


def _channels_last(image) -> np.ndarray:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3:
        raise ValueError(f"image must be (H, W) or (H, W, C), got {img.shape}")
    return img


def extract_patches(
    image,
    mask,
    window: int = 32,
    overlap_threshold: float = 0.95,
    stride: int | None = None,
    image_id: int = 0,
) -> list[LabeledPatch]:
    """Label windows on a regular grid of centers by their foreground overlap.

    The image and mask are mirror-extended by ``window // 2`` so windows
    centered near the border stay full size.  Centers sit at
    ``stride // 2 + i * stride``.  A window whose foreground fraction
    exceeds ``overlap_threshold`` is a target patch, one below
    ``1 - overlap_threshold`` is background, anything between is dropped.
    """
    img = _channels_last(image)
    fg = np.asarray(mask) > 0
    h, w = img.shape[:2]
    if fg.shape != (h, w):
        raise ValueError(f"mask shape {fg.shape} differs from image shape {(h, w)}")
    if not 0 < overlap_threshold <= 1:
        raise ValueError(f"overlap_threshold must be in (0, 1], got {overlap_threshold}")
    if window < 1 or window > min(h, w):
        raise ValueError(f"window {window} larger than image {w}x{h}")
    stride = window // 2 if stride is None else int(stride)
    if stride < 1:
        raise ValueError(f"stride must be positive, got {stride}")
    pad = window // 2
    img_p = np.pad(img, ((pad, pad), (pad, pad), (0, 0)), mode="symmetric")
    fg_p = np.pad(fg, pad, mode="symmetric")
    # integral image for O(1) window counts
    integral = np.zeros((fg_p.shape[0] + 1, fg_p.shape[1] + 1), dtype=np.int64)
    integral[1:, 1:] = fg_p.cumsum(0).cumsum(1)
    area = window * window
    out = []
    for cy in range(stride // 2, h, stride):
        for cx in range(stride // 2, w, stride):
            top, left = cy - pad + pad, cx - pad + pad
            count = (
                integral[top + window, left + window]
                - integral[top, left + window]
                - integral[top + window, left]
                + integral[top, left]
            )
            frac = count / area
            if frac > overlap_threshold:
                label = TARGET
            elif frac < 1 - overlap_threshold:
                label = BACKGROUND
            else:
                continue
            px = img_p[top : top + window, left : left + window].transpose(2, 0, 1)
            out.append(LabeledPatch(px.copy(), label, (image_id, cx, cy)))
    return out


def normalize_patch(p: LabeledPatch) -> LabeledPatch:
    """Zero mean and unit L2 norm per channel; constant channels become zeros."""
    px = p.pixels
    out = np.zeros_like(px)
    for c in range(px.shape[0]):
        ch = px[c]
        if np.ptp(ch) == 0:
            continue
        centered = ch - ch.mean()
        out[c] = centered / np.linalg.norm(centered)
    return LabeledPatch(out, p.label, p.source)


@dataclass
class FeatureTensor:
    """``values[l, n, d]``: feature ``l`` of signal ``n`` at order setting ``d``."""

    values: np.ndarray
    labels: np.ndarray
    order_grid: list[FractionalOrderPair]
    feature_names: list[str] | None = field(default=None, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.order_grid = [FractionalOrderPair.coerce(o) for o in self.order_grid]
        if self.values.ndim != 3:
            raise ValueError(f"values must be L x N x D, got shape {self.values.shape}")
        L, N, D = self.values.shape
        if len(self.order_grid) != D:
            raise ValueError(f"order grid has {len(self.order_grid)} entries, tensor D={D}")
        if self.labels.shape != (N,):
            raise ValueError(f"labels length {self.labels.shape} != N={N}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")
        if self.feature_names is not None and len(self.feature_names) != L:
            raise ValueError("feature_names length != L")

    @property
    def L(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    @property
    def D(self) -> int:
        return self.values.shape[2]

    def order_slice(self, d: int) -> np.ndarray:
        """(N, L) matrix of feature vectors at order setting ``d``."""
        return self.values[:, :, d].T

    def to_csv(self, path) -> None:
        names = self.feature_names or [f"f{i}" for i in range(self.L)]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(["alpha1", "alpha2", "sample", "label", *names]) + "\n")
            for d, o in enumerate(self.order_grid):
                for n in range(self.N):
                    row = [repr(o.alpha1), repr(o.alpha2), str(n), str(int(self.labels[n]))]
                    row.extend(repr(float(v)) for v in self.values[:, n, d])
                    fh.write(",".join(row) + "\n")


def feature_names(num_scales: int, num_angles: int, max_order: int, channels: int) -> list[str]:
    """Column names in tensor order: path-major, channel-minor."""
    return [
        f"{p}:c{c}" for p in enumerate_paths(num_scales, num_angles, max_order) for c in range(channels)
    ]


def _pad_plan(patch_shape, grid_shape):
    h, w = patch_shape
    gh, gw = grid_shape
    if gh < h or gw < w:
        raise ValueError(f"bank grid {gw}x{gh} is smaller than patch {w}x{h}")
    top, left = (gh - h) // 2, (gw - w) // 2
    pads = ((top, gh - h - top), (left, gw - w - left))
    region = (slice(top, top + h), slice(left, left + w))
    if gh - h > h or gw - w > w:
        raise ValueError(
            f"bank grid {gw}x{gh} needs more mirror padding than patch {w}x{h} provides"
        )
    return pads, region


def patch_features(patch: LabeledPatch, bank: FilterBank, orders, max_order: int | None = None) -> np.ndarray:
    """Path-major, channel-minor feature vector of one patch at one order setting."""
    pads, region = _pad_plan(patch.shape, bank.shape)
    per_channel = []
    for ch in patch.pixels:
        grid = np.pad(ch, pads, mode="symmetric") if any(map(any, pads)) else ch
        per_channel.append(scatter_reduce(grid, bank, orders, region, max_order))
    return np.stack(per_channel, axis=1).ravel()


def assemble_q(
    patches,
    bank: FilterBank,
    order_grid=None,
    normalize: bool = True,
    max_order: int | None = None,
    threads: int | None = None,
) -> FeatureTensor:
    """Scatter every patch at every order setting and reduce each
    coefficient image to its mean over the patch footprint.

    Patches smaller than the bank grid are mirror-padded to it.
    """
    patches = list(patches)
    if not patches:
        raise ValueError("no patches to assemble")
    order_grid = default_order_grid() if order_grid is None else [FractionalOrderPair.coerce(o) for o in order_grid]
    if not order_grid:
        raise ValueError("empty order grid")
    shape, channels = patches[0].shape, patches[0].channels
    for i, p in enumerate(patches):
        if p.shape != shape or p.channels != channels:
            raise ValueError(f"patch {i} has shape {p.pixels.shape}, expected {(channels,) + shape}")
    _pad_plan(shape, bank.shape)
    m = bank.spec.max_order if max_order is None else max_order
    L = channels * count_paths(bank.num_scales, bank.num_angles, m)
    values = np.empty((L, len(patches), len(order_grid)), dtype=np.float64)
    prepared = [normalize_patch(p) if normalize else p for p in patches]

    def work(n):
        for d, o in enumerate(order_grid):
            values[:, n, d] = patch_features(prepared[n], bank, o, m)

    workers = min(threads or thread_count(), len(patches))
    if workers <= 1:
        for n in range(len(patches)):
            work(n)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(len(patches))))
    labels = np.array([p.label for p in patches], dtype=np.int64)
    names = feature_names(bank.num_scales, bank.num_angles, m, channels)
    return FeatureTensor(values, labels, order_grid, names)


def save_tensor(t: FeatureTensor, path) -> None:
    grid = [(o.alpha1, o.alpha2) for o in t.order_grid]
    FsPath(path).write_bytes(io.pack_tensor(t.values, grid, t.labels))


def load_tensor(path) -> FeatureTensor:
    values, grid, labels = io.unpack_tensor(FsPath(path).read_bytes())
    return FeatureTensor(values, labels, [tuple(g) for g in grid])
