"""Slow reference implementations written independently of the package.

They share no code with ``frscat`` beyond taking its filter arrays as
inputs, and favor plain loops and scalar math over speed.
"""

import cmath
import math
from itertools import combinations, product

import numpy as np


def cot_half_pi(alpha):
    if alpha == 1:
        return 0.0
    return 1.0 / math.tan(alpha * math.pi / 2)


def chirp_sample(n1, n2, width, height, alpha1, alpha2, sign):
    """One chirp sample at column ``n1``, row ``n2``."""
    u1 = (n1 - width // 2) / math.sqrt(width)
    u2 = (n2 - height // 2) / math.sqrt(height)
    phase = 0.5 * sign * (u1 * u1 * cot_half_pi(alpha1) + u2 * u2 * cot_half_pi(alpha2))
    return cmath.exp(1j * phase)


def chirp_array(width, height, alpha1, alpha2, sign):
    out = np.empty((height, width), dtype=complex)
    for r in range(height):
        for c in range(width):
            out[r, c] = chirp_sample(c, r, width, height, alpha1, alpha2, sign)
    return out


def frac_convolve_direct(x, h_hat, alpha1, alpha2):
    """Spatial double sum ``c-(n) sum_m h(n - m) c+(m) x(m)`` with circular
    indexing: O(N^4) on an N x N grid."""
    height, width = x.shape
    h = np.fft.ifft2(h_hat)
    cp = chirp_array(width, height, alpha1, alpha2, +1)
    cm = chirp_array(width, height, alpha1, alpha2, -1)
    v = cp * x
    out = np.empty((height, width), dtype=complex)
    for r in range(height):
        for c in range(width):
            acc = 0j
            for mr in range(height):
                hrow = h[(r - mr) % height]
                vrow = v[mr]
                for mc in range(width):
                    acc += hrow[(c - mc) % width] * vrow[mc]
            out[r, c] = cm[r, c] * acc
    return out


def _conv(x, h_hat):
    return np.fft.ifft2(np.fft.fft2(x) * h_hat)


def classical_scattering(x, phi_hat, psi_hat, max_order):
    """Windowed scattering by explicit recursion over every path.

    Returns ``{steps: S image}`` with ``steps`` a tuple of (j, k).
    """
    S, K = psi_hat.shape[:2]
    out = {}

    def walk(u, steps):
        out[steps] = np.abs(_conv(u, phi_hat))
        if len(steps) == max_order:
            return
        last = steps[-1][0] if steps else -1
        for j in range(last + 1, S):
            for k in range(K):
                walk(np.abs(_conv(u, psi_hat[j, k])), steps + ((j, k),))

    walk(np.asarray(x, dtype=complex), ())
    return out


def path_list(S, K, max_order):
    out = []
    for m in range(max_order + 1):
        for js in combinations(range(S), m):
            for ks in product(range(K), repeat=m):
                out.append(tuple(zip(js, ks)))
    return out


def brute_hausdorff(a, b):
    pa = np.argwhere(a)
    pb = np.argwhere(b)
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(-1))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def _ids(mask):
    return [int(i) for i in np.unique(mask) if i != 0]


def _partner(mask_obj, other):
    """Other-mask object with the largest overlap; ties to the smaller object, then lower id."""
    best = None
    for o in _ids(other):
        ov = int(np.sum(mask_obj & (other == o)))
        if ov == 0:
            continue
        key = (-ov, int(np.sum(other == o)), o)
        if best is None or key < best[0]:
            best = (key, o)
    return None if best is None else best[1]


def brute_object_dice(seg, gt):
    if not _ids(seg) and not _ids(gt):
        return 1.0
    total = 0.0
    for a, b in ((seg, gt), (gt, seg)):
        ids = _ids(a)
        if not ids:
            continue
        area = sum(int(np.sum(a == i)) for i in ids)
        acc = 0.0
        for i in ids:
            obj = a == i
            o = _partner(obj, b)
            if o is None:
                continue
            other = b == o
            acc += np.sum(obj) * 2 * np.sum(obj & other) / (np.sum(obj) + np.sum(other))
        total += acc / area
    return 0.5 * total


def brute_object_hausdorff(seg, gt):
    diag = math.hypot(*seg.shape)
    si, gi = _ids(seg), _ids(gt)
    if not si and not gi:
        return 0.0
    if not si or not gi:
        return diag
    total = 0.0
    for a, b in ((seg, gt), (gt, seg)):
        ids = _ids(a)
        area = sum(int(np.sum(a == i)) for i in ids)
        acc = 0.0
        for i in ids:
            obj = a == i
            o = _partner(obj, b)
            h = diag if o is None else brute_hausdorff(obj, b == o)
            acc += np.sum(obj) * h
        total += acc / area
    return 0.5 * total


def random_instance_mask(rng, shape, max_objects):
    """Random rectangles and discs, later objects painted over earlier ones."""
    h, w = shape
    mask = np.zeros(shape, dtype=np.int64)
    yy, xx = np.mgrid[:h, :w]
    for obj in range(1, int(rng.integers(0, max_objects + 1)) + 1):
        if rng.random() < 0.5:
            y0, x0 = rng.integers(0, h - 2), rng.integers(0, w - 2)
            y1, x1 = y0 + rng.integers(2, h // 2 + 2), x0 + rng.integers(2, w // 2 + 2)
            mask[y0:y1, x0:x1] = obj
        else:
            cy, cx, r = rng.uniform(0, h), rng.uniform(0, w), rng.uniform(1.5, h / 3)
            mask[(yy - cy) ** 2 + (xx - cx) ** 2 <= r * r] = obj
    return mask
