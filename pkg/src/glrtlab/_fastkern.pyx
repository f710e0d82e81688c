# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot kernels.

Mirrors ``_purekern`` exactly: same Philox-4x64-10 streams, same
uniform-to-Gaussian mapping (both call the identical inverse normal CDF),
so random output is bit-identical between backends.  Cost sums run as
plain sequential loops and may differ from the numpy reduction by last-ulp
rounding only.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint64_t
from scipy.special.cython_special cimport ndtri

cnp.import_array()

BACKEND_NAME = "compiled"

TRIAL_NOISE_BLOCK_OFFSET = 1

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t glrtlab_mulhi64(uint64_t a, uint64_t b) {
        return (uint64_t)(((__uint128_t)a * (__uint128_t)b) >> 64);
    }
    """
    uint64_t glrtlab_mulhi64(uint64_t a, uint64_t b) nogil

cdef uint64_t M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t M1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL

cdef double TWO_NEG53 = 1.0 / 9007199254740992.0


cdef inline void _philox_block(uint64_t k0, uint64_t k1, uint64_t c0,
                               uint64_t* out) nogil:
    cdef uint64_t x0 = c0, x1 = 0, x2 = 0, x3 = 0
    cdef uint64_t hi0, lo0, hi1, lo1
    cdef int r
    for r in range(10):
        hi0 = glrtlab_mulhi64(M0, x0)
        lo0 = M0 * x0
        hi1 = glrtlab_mulhi64(M1, x2)
        lo1 = M1 * x2
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        k0 = k0 + W0
        k1 = k1 + W1
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = x3


cdef inline double _u01(uint64_t v) nogil:
    return (<double> (v >> 11) + 0.5) * TWO_NEG53


def philox4x64(key0, key1, ctr0):
    """10-round Philox-4x64 on counter (ctr0, 0, 0, 0); see _purekern."""
    key0a, key1a, ctr0a = np.broadcast_arrays(
        np.asarray(key0, dtype=np.uint64),
        np.asarray(key1, dtype=np.uint64),
        np.asarray(ctr0, dtype=np.uint64),
    )
    cdef uint64_t[::1] k0 = np.ascontiguousarray(key0a).reshape(-1)
    cdef uint64_t[::1] k1 = np.ascontiguousarray(key1a).reshape(-1)
    cdef uint64_t[::1] c0 = np.ascontiguousarray(ctr0a).reshape(-1)
    cdef Py_ssize_t n = k0.shape[0]
    out = np.empty((n, 4), dtype=np.uint64)
    cdef uint64_t[:, ::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _philox_block(k0[i], k1[i], c0[i], &o[i, 0])
    return out.reshape(key0a.shape + (4,))


def standard_normals(master_seed, stream_index, Py_ssize_t n, Py_ssize_t start=0):
    """``n`` standard normal variates from one stream, lanes [start, start+n)."""
    if n < 1:
        raise ValueError("need at least one variate")
    cdef uint64_t seed = <uint64_t> int(master_seed)
    cdef uint64_t stream = <uint64_t> int(stream_index)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t buf[4]
    cdef Py_ssize_t j = 0, lane
    cdef uint64_t block = <uint64_t> (start // 4)
    cdef Py_ssize_t first_lane = start % 4
    with nogil:
        while j < n:
            _philox_block(seed, stream, block, buf)
            for lane in range(first_lane, 4):
                if j == n:
                    break
                o[j] = ndtri(_u01(buf[lane]))
                j += 1
            first_lane = 0
            block += 1
    return out


def trial_normals(master_seed, trial_start, Py_ssize_t n_trials, Py_ssize_t d):
    """(n_trials, d) standard normals; row i uses stream trial_start + i."""
    if n_trials < 1 or d < 1:
        raise ValueError("need n_trials >= 1 and d >= 1")
    cdef uint64_t seed = <uint64_t> int(master_seed)
    cdef uint64_t t0 = <uint64_t> int(trial_start)
    cdef Py_ssize_t nb = (d + 3) // 4
    out = np.empty((n_trials, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef uint64_t buf[4]
    cdef Py_ssize_t i, b, lane, j
    cdef uint64_t offset = <uint64_t> TRIAL_NOISE_BLOCK_OFFSET
    with nogil:
        for i in range(n_trials):
            j = 0
            for b in range(nb):
                _philox_block(seed, t0 + <uint64_t> i, offset + <uint64_t> b, buf)
                for lane in range(4):
                    if j == d:
                        break
                    o[i, j] = ndtri(_u01(buf[lane]))
                    j += 1
    return out


def trial_uniforms(master_seed, trial_start, Py_ssize_t n_trials):
    """One uniform (0,1) per trial from the reserved counter block 0."""
    if n_trials < 1:
        raise ValueError("need n_trials >= 1")
    cdef uint64_t seed = <uint64_t> int(master_seed)
    cdef uint64_t t0 = <uint64_t> int(trial_start)
    out = np.empty(n_trials, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t buf[4]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n_trials):
            _philox_block(seed, t0 + <uint64_t> i, 0, buf)
            o[i] = _u01(buf[0])
    return out


def glrt_costs(x, means, double eps):
    """Soft-threshold residual costs, one per (row of x, hypothesis)."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] mv = np.ascontiguousarray(means, dtype=np.float64)
    cdef Py_ssize_t B = xv.shape[0], d = xv.shape[1], K = mv.shape[0]
    if mv.shape[1] != d:
        raise ValueError("dimension mismatch between observations and means")
    out = np.empty((B, K), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t b, k, i
    cdef double acc, r
    with nogil:
        for b in range(B):
            for k in range(K):
                acc = 0.0
                for i in range(d):
                    r = xv[b, i] - mv[k, i]
                    if r < 0.0:
                        r = -r
                    r -= eps
                    if r > 0.0:
                        acc += r * r
                o[b, k] = acc
    return out
