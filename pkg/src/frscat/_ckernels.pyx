# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of :mod:`frscat._pykernels`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef inline void _cmul_row(const double *a, const double *b, double *o, Py_ssize_t n) noexcept nogil:
    # interleaved (re, im) pairs; same formula as numpy, no inf/nan recovery
    cdef Py_ssize_t t
    cdef double ar, ai, br, bi
    for t in range(n):
        ar = a[2 * t]
        ai = a[2 * t + 1]
        br = b[2 * t]
        bi = b[2 * t + 1]
        o[2 * t] = ar * br - ai * bi
        o[2 * t + 1] = ar * bi + ai * br


def gather_multiply(const double complex[:, :, ::1] spec,
                    const cnp.intp_t[::1] pidx,
                    const double complex[:, :, :, ::1] filters,
                    const cnp.intp_t[::1] js,
                    const cnp.intp_t[::1] ks,
                    double complex[:, :, ::1] out):
    cdef Py_ssize_t n = pidx.shape[0], m = spec.shape[1] * spec.shape[2]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _cmul_row(<const double *> &spec[pidx[i], 0, 0],
                      <const double *> &filters[js[i], ks[i], 0, 0],
                      <double *> &out[i, 0, 0], m)
    return np.asarray(out)


def broadcast_multiply(const double complex[:, :, ::1] spec,
                       const double complex[:, ::1] filt,
                       double complex[:, :, ::1] out):
    cdef Py_ssize_t n = spec.shape[0], m = spec.shape[1] * spec.shape[2]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _cmul_row(<const double *> &spec[i, 0, 0], <const double *> &filt[0, 0],
                      <double *> &out[i, 0, 0], m)
    return np.asarray(out)


def modulus_energy(const double complex[:, :, ::1] z, double[:, :, ::1] out):
    cdef Py_ssize_t n = z.shape[0], h = z.shape[1], w = z.shape[2]
    cdef Py_ssize_t i, r, c
    cdef double re, im, m, total = 0.0
    with nogil:
        for i in range(n):
            for r in range(h):
                for c in range(w):
                    re = z[i, r, c].real
                    im = z[i, r, c].imag
                    m = sqrt(re * re + im * im)
                    out[i, r, c] = m
                    total += m * m
    return total


def block_means(const double[:, :, ::1] block, Py_ssize_t r0, Py_ssize_t r1,
                Py_ssize_t c0, Py_ssize_t c1, double[::1] out):
    cdef Py_ssize_t n = block.shape[0], i, r, c
    cdef double acc
    cdef double count = <double>((r1 - r0) * (c1 - c0))
    with nogil:
        for i in range(n):
            acc = 0.0
            for r in range(r0, r1):
                for c in range(c0, c1):
                    acc += block[i, r, c]
            out[i] = acc / count
    return np.asarray(out)


def directed_hausdorff(a, b):
    """Early-break directed Hausdorff distance between (n, 2) point sets."""
    cdef double[:, ::1] pa = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] pb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t na = pa.shape[0], nb = pb.shape[0], i, k
    cdef double cmax = 0.0, cmin, dx, dy, d
    cdef bint broke
    with nogil:
        for i in range(na):
            cmin = INFINITY
            broke = False
            for k in range(nb):
                dx = pa[i, 0] - pb[k, 0]
                dy = pa[i, 1] - pb[k, 1]
                d = dx * dx + dy * dy
                if d < cmax:
                    broke = True
                    break
                if d < cmin:
                    cmin = d
            if not broke and cmin > cmax and cmin != INFINITY:
                cmax = cmin
    return sqrt(cmax)


def contingency(seg, gt, Py_ssize_t n_seg, Py_ssize_t n_gt):
    cdef cnp.int64_t[::1] s = np.ascontiguousarray(seg, dtype=np.int64).ravel()
    cdef cnp.int64_t[::1] g = np.ascontiguousarray(gt, dtype=np.int64).ravel()
    table = np.zeros((n_seg + 1, n_gt + 1), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] t = table
    cdef Py_ssize_t i, n = s.shape[0]
    with nogil:
        for i in range(n):
            t[s[i], g[i]] += 1
    return table
