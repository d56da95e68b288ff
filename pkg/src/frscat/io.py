"""Binary file formats: Netpbm images and the FRSC/FRSM containers.

Feature tensor (``FRSC``), all little-endian::

    b"FRSC" | u32 version | u64 L | u64 N | u64 D
    | D x (f64 alpha1, f64 alpha2) | N x i32 label
    | L*N*D x f64 values, nested (d, n, l) with d slowest

PCA model set (``FRSM``)::

    b"FRSM" | u32 version | u64 L | u64 M | f64 alpha1 | f64 alpha2
    | M x (i32 class_id | u64 d | L x f64 mean | L*d x f64 basis, row-major L x d)
"""

from __future__ import annotations

import struct
from pathlib import Path as FsPath

import numpy as np

__all__ = [
    "FormatError",
    "read_pnm",
    "write_pgm",
    "write_ppm",
    "read_mask",
    "write_mask",
    "pack_tensor",
    "unpack_tensor",
    "pack_models",
    "unpack_models",
]

TENSOR_MAGIC = b"FRSC"
MODEL_MAGIC = b"FRSM"
FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed or truncated file contents."""


# ---------------------------------------------------------------- Netpbm


def _pnm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated Netpbm header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def decode_pnm(data: bytes) -> np.ndarray:
    """Decode binary P5/P6 bytes; returns (H, W) or (H, W, 3) unsigned ints."""
    tokens, pos = _pnm_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"expected binary Netpbm magic P5 or P6, got {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"bad Netpbm header: {exc}") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"bad Netpbm dimensions {width}x{height} maxval {maxval}")
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * channels * dtype.itemsize
    raster = data[pos : pos + need]
    if len(raster) != need:
        raise FormatError(f"truncated Netpbm raster: need {need} bytes, have {len(raster)}")
    arr = np.frombuffer(raster, dtype=dtype).astype(np.uint16 if maxval > 255 else np.uint8)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return arr.reshape(shape)


def read_pnm(path) -> np.ndarray:
    return decode_pnm(FsPath(path).read_bytes())


def encode_pnm(arr: np.ndarray, maxval: int | None = None) -> bytes:
    arr = np.asarray(arr)
    if arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    elif arr.ndim == 2:
        magic = b"P5"
    else:
        raise ValueError(f"expected (H, W) or (H, W, 3) array, got {arr.shape}")
    if maxval is None:
        maxval = 255 if arr.dtype == np.uint8 else 65535
    if arr.size and (arr.min() < 0 or arr.max() > maxval):
        raise ValueError(f"pixel values outside [0, {maxval}]")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    h, w = arr.shape[:2]
    header = b"%s\n%d %d\n%d\n" % (magic, w, h, maxval)
    return header + np.ascontiguousarray(arr).astype(dtype).tobytes()


def write_pgm(path, arr, maxval: int | None = None) -> None:
    FsPath(path).write_bytes(encode_pnm(arr, maxval))


write_ppm = write_pgm


def read_mask(path) -> np.ndarray:
    """Instance mask from a P5 image; pixel value is the object id."""
    arr = read_pnm(path)
    if arr.ndim != 2:
        raise FormatError(f"{path}: instance masks must be single-channel (P5)")
    return arr.astype(np.int64)


def write_mask(path, labels) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("instance mask must be 2D")
    write_pgm(path, labels.astype(np.uint16), maxval=65535)


def scale_to_u8(img: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Linear map of ``[min, max]`` onto ``[0, 255]``; constant images map to 0."""
    lo, hi = float(img.min()), float(img.max())
    if hi > lo:
        out = np.rint((img - lo) * (255.0 / (hi - lo)))
    else:
        out = np.zeros_like(img)
    return out.astype(np.uint8), lo, hi


# ---------------------------------------------------------------- containers


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise FormatError(
                f"truncated {self.what}: need {n} bytes at offset {self.pos}, "
                f"file has {len(self.data)}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype: str, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(dt.itemsize * count), dtype=dt).copy()


def _check_header(r: _Reader, magic: bytes) -> None:
    got = r.take(4) if len(r.data) >= 4 else r.data
    if got != magic:
        raise FormatError(f"bad magic: expected {magic!r}, got {bytes(got)!r}")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported {magic.decode()} version {version}; expected {FORMAT_VERSION}")


def pack_tensor(values: np.ndarray, order_grid, labels) -> bytes:
    """Serialize an (L, N, D) array with its order grid and labels."""
    values = np.asarray(values, dtype=np.float64)
    L, N, D = values.shape
    grid = np.asarray(order_grid, dtype=np.float64).reshape(-1, 2)
    labels = np.asarray(labels, dtype=np.int64)
    if grid.shape[0] != D or labels.shape != (N,):
        raise ValueError("order grid / labels disagree with tensor dimensions")
    parts = [
        TENSOR_MAGIC,
        struct.pack("<IQQQ", FORMAT_VERSION, L, N, D),
        grid.astype("<f8").tobytes(),
        labels.astype("<i4").tobytes(),
        np.ascontiguousarray(values.transpose(2, 1, 0)).astype("<f8").tobytes(),
    ]
    return b"".join(parts)


def unpack_tensor(data: bytes):
    """Inverse of :func:`pack_tensor`: returns ``(values, order_grid, labels)``."""
    r = _Reader(data, "FRSC tensor")
    _check_header(r, TENSOR_MAGIC)
    L, N, D = r.unpack("<QQQ")
    payload = 16 * D + 4 * N + 8 * L * N * D
    remaining = len(data) - r.pos
    if remaining != payload:
        raise FormatError(
            f"FRSC header dims L={L} N={N} D={D} imply {payload} payload bytes, "
            f"file has {remaining}"
        )
    grid = r.array("<f8", 2 * D).reshape(D, 2)
    labels = r.array("<i4", N).astype(np.int64)
    flat = r.array("<f8", L * N * D).astype(np.float64)
    values = np.ascontiguousarray(flat.reshape(D, N, L).transpose(2, 1, 0))
    return values, grid, labels


def pack_models(models, orders) -> bytes:
    """Serialize PCA class models that share one feature length."""
    models = list(models)
    if not models:
        raise ValueError("no models to write")
    L = len(models[0].mean)
    parts = [MODEL_MAGIC, struct.pack("<IQQdd", FORMAT_VERSION, L, len(models), *orders)]
    for m in models:
        if len(m.mean) != L or m.basis.shape[0] != L:
            raise ValueError("models disagree on feature length")
        parts.append(struct.pack("<iQ", int(m.class_id), int(m.basis.shape[1])))
        parts.append(np.asarray(m.mean, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(m.basis, dtype="<f8").tobytes())
    return b"".join(parts)


def unpack_models(data: bytes):
    """Returns ``(orders, [(class_id, mean, basis), ...])``."""
    r = _Reader(data, "FRSM model file")
    _check_header(r, MODEL_MAGIC)
    L, M, a1, a2 = r.unpack("<QQdd")
    out = []
    for _ in range(M):
        class_id, d = r.unpack("<iQ")
        if d > L:
            raise FormatError(f"model for class {class_id} has d={d} > L={L}")
        mean = r.array("<f8", L).astype(np.float64)
        basis = r.array("<f8", L * d).astype(np.float64).reshape(L, d)
        out.append((class_id, mean, basis))
    if r.pos != len(data):
        raise FormatError(f"{len(data) - r.pos} trailing bytes after {M} models")
    return (a1, a2), out
