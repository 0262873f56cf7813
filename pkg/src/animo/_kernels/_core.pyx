# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core.

Mirror of animo._kernels._pure: identical signatures and identical
double arithmetic (same expression order), so outputs are bit-identical
with the fallback.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "c"


def ema_filter(x, double alpha):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    cdef double beta = 1.0 - alpha
    cdef double prev = xs[0]
    cdef Py_ssize_t i
    out[0] = prev
    for i in range(1, n):
        prev = alpha * xs[i] + beta * prev
        out[i] = prev
    return out


def arousal_values(x, double low, double high):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double span = high - low
    cdef double v
    cdef Py_ssize_t i
    for i in range(n):
        v = (xs[i] - low) / span
        if v < 0.0:
            v = 0.0
        elif v > 1.0:
            v = 1.0
        out[i] = v
    return out


def band_codes(values, double t_low, double t_high):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vs = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = vs.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.empty(n, dtype=np.uint8)
    cdef double v
    cdef Py_ssize_t i
    for i in range(n):
        v = vs[i]
        if v < t_low:
            out[i] = 0
        elif v > t_high:
            out[i] = 2
        else:
            out[i] = 1
    return out


def notify_points(bands, ts, double min_gap):
    """Indices where a band change passes the notification debounce."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] bs = np.ascontiguousarray(bands, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] times = np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t n = bs.shape[0]
    if n != times.shape[0]:
        raise ValueError("bands and ts must have equal length")
    hits = []
    cdef double last = 0.0
    cdef bint have_last = False
    cdef Py_ssize_t i
    for i in range(1, n):
        if bs[i] != bs[i - 1] and (not have_last or times[i] - last >= min_gap):
            hits.append(i)
            last = times[i]
            have_last = True
    return np.asarray(hits, dtype=np.int64)
