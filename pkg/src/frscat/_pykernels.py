"""Pure numpy implementations of the hot kernels.

Every function here has a compiled twin in ``_ckernels.pyx`` with the same
signature and results; :mod:`frscat.kernels` picks one at import time.
"""

import numpy as np


def gather_multiply(spec, pidx, filters, js, ks, out):
    """``out[i] = spec[pidx[i]] * filters[js[i], ks[i]]``."""
    np.multiply(spec[pidx], filters[js, ks], out=out)
    return out


def broadcast_multiply(spec, filt, out):
    """``out[i] = spec[i] * filt`` for every leading index ``i``."""
    np.multiply(spec, filt, out=out)
    return out


def modulus_energy(z, out):
    """Write ``|z|`` into ``out`` and return ``sum |z|^2``."""
    np.abs(z, out=out)
    return float(np.sum(out * out))


def block_means(block, r0, r1, c0, c1, out):
    """Mean of ``block[i, r0:r1, c0:c1]`` for every ``i``."""
    out[:] = block[:, r0:r1, c0:c1].mean(axis=(1, 2))
    return out


def directed_hausdorff(a, b):
    """``max_{p in a} min_{q in b} |p - q|`` for integer point sets of shape (n, 2)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    best = 0.0
    # chunked to keep the distance matrix small
    step = max(1, 4_000_000 // max(len(b), 1))
    for s in range(0, len(a), step):
        chunk = a[s : s + step]
        d2 = (
            (chunk[:, None, 0] - b[None, :, 0]) ** 2
            + (chunk[:, None, 1] - b[None, :, 1]) ** 2
        )
        best = max(best, float(d2.min(axis=1).max()))
    return float(np.sqrt(best))


def contingency(seg, gt, n_seg, n_gt):
    """Pixel counts ``table[s, g]`` of label pairs; labels in ``[0, n]``."""
    seg = np.asarray(seg, dtype=np.int64).ravel()
    gt = np.asarray(gt, dtype=np.int64).ravel()
    flat = seg * (n_gt + 1) + gt
    table = np.bincount(flat, minlength=(n_seg + 1) * (n_gt + 1))
    return table.reshape(n_seg + 1, n_gt + 1).astype(np.int64)
