# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled conv/pool kernels; semantics identical to _pykernels."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def conv2d3x3_same_fwd(cnp.ndarray[cnp.float64_t, ndim=4] x,
                       cnp.ndarray[cnp.float64_t, ndim=4] w,
                       cnp.ndarray[cnp.float64_t, ndim=1] b):
    cdef Py_ssize_t bsz = x.shape[0], h = x.shape[1], wd = x.shape[2], cin = x.shape[3]
    cdef Py_ssize_t nf = w.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=4] y = np.empty((bsz, h, wd, nf))
    cdef Py_ssize_t n, i, j, f, c, dy, dx, ii, jj
    cdef double acc
    for n in range(bsz):
        for i in range(h):
            for j in range(wd):
                for f in range(nf):
                    acc = b[f]
                    for dy in range(3):
                        ii = i + dy - 1
                        if ii < 0 or ii >= h:
                            continue
                        for dx in range(3):
                            jj = j + dx - 1
                            if jj < 0 or jj >= wd:
                                continue
                            for c in range(cin):
                                acc += x[n, ii, jj, c] * w[f, dy, dx, c]
                    y[n, i, j, f] = acc
    return y


def conv2d3x3_same_bwd(cnp.ndarray[cnp.float64_t, ndim=4] x,
                       cnp.ndarray[cnp.float64_t, ndim=4] w,
                       cnp.ndarray[cnp.float64_t, ndim=4] gy):
    cdef Py_ssize_t bsz = x.shape[0], h = x.shape[1], wd = x.shape[2], cin = x.shape[3]
    cdef Py_ssize_t nf = w.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=4] gx = np.zeros((bsz, h, wd, cin))
    cdef cnp.ndarray[cnp.float64_t, ndim=4] gw = np.zeros((nf, 3, 3, cin))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gb = np.zeros(nf)
    cdef Py_ssize_t n, i, j, f, c, dy, dx, ii, jj
    cdef double g
    for n in range(bsz):
        for i in range(h):
            for j in range(wd):
                for f in range(nf):
                    g = gy[n, i, j, f]
                    gb[f] += g
                    for dy in range(3):
                        ii = i + dy - 1
                        if ii < 0 or ii >= h:
                            continue
                        for dx in range(3):
                            jj = j + dx - 1
                            if jj < 0 or jj >= wd:
                                continue
                            for c in range(cin):
                                gw[f, dy, dx, c] += x[n, ii, jj, c] * g
                                gx[n, ii, jj, c] += w[f, dy, dx, c] * g
    return gx, gw, gb


def maxpool2x2_fwd(cnp.ndarray[cnp.float64_t, ndim=4] x):
    cdef Py_ssize_t bsz = x.shape[0], h = x.shape[1], wd = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t h2 = h // 2, w2 = wd // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=4] out = np.empty((bsz, h2, w2, c))
    cdef cnp.ndarray[cnp.int64_t, ndim=4] idx = np.empty((bsz, h2, w2, c), dtype=np.int64)
    cdef Py_ssize_t n, i, j, ch, dy, dx, best
    cdef double val, bestval
    for n in range(bsz):
        for i in range(h2):
            for j in range(w2):
                for ch in range(c):
                    best = 0
                    bestval = x[n, 2 * i, 2 * j, ch]
                    for dy in range(2):
                        for dx in range(2):
                            val = x[n, 2 * i + dy, 2 * j + dx, ch]
                            if val > bestval:
                                bestval = val
                                best = 2 * dy + dx
                    out[n, i, j, ch] = bestval
                    idx[n, i, j, ch] = best
    return out, idx


def maxpool2x2_bwd(cnp.ndarray[cnp.int64_t, ndim=4] idx,
                   cnp.ndarray[cnp.float64_t, ndim=4] gy,
                   shape):
    cdef Py_ssize_t bsz = shape[0], h = shape[1], wd = shape[2], c = shape[3]
    cdef Py_ssize_t h2 = h // 2, w2 = wd // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=4] gx = np.zeros((bsz, h, wd, c))
    cdef Py_ssize_t n, i, j, ch, k
    for n in range(bsz):
        for i in range(h2):
            for j in range(w2):
                for ch in range(c):
                    k = idx[n, i, j, ch]
                    gx[n, 2 * i + (k >> 1), 2 * j + (k & 1), ch] = gy[n, i, j, ch]
    return gx
