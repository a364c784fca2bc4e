# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels; see ``_core_py.py`` for the reference twin."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, lgamma

cnp.import_array()


def truncated_poisson_mean(double mean, long long k):
    """Return ``E[min(A, k)]`` for ``A ~ Poisson(mean)``."""
    cdef long long i
    cdef double log_mean, logp, acc, tail, term
    if k <= 0 or mean <= 0.0:
        return 0.0
    log_mean = log(mean)
    if k <= mean:
        logp = -mean
        acc = 0.0
        for i in range(k):
            acc += (k - i) * exp(logp)
            logp += log_mean - log(<double>(i + 1))
        return k - acc
    i = k + 1
    logp = -mean + i * log_mean - lgamma(i + 1.0)
    tail = 0.0
    while True:
        term = (i - k) * exp(logp)
        tail += term
        if i + 1 > 2.0 * mean and term <= 1e-17 * mean:
            break
        i += 1
        logp += log_mean - log(<double>i)
    return mean - tail


def geometric_moment_sums(double r, long long k):
    """Return ``(sum_{i=0}^k r**i, sum_{i=0}^k i * r**i)`` with Kahan sums."""
    cdef long long i
    cdef double s0 = 0.0, c0 = 0.0, s1 = 0.0, c1 = 0.0, p = 1.0, y, t
    for i in range(k + 1):
        y = p - c0
        t = s0 + y
        c0 = (t - s0) - y
        s0 = t
        y = i * p - c1
        t = s1 + y
        c1 = (t - s1) - y
        s1 = t
        p *= r
    return s0, s1


def fifo_novelty(hi, long long k):
    """Count never-before-seen posts in each FIFO window ending at ``hi[j]``."""
    cdef cnp.int64_t[::1] h = np.ascontiguousarray(hi, dtype=np.int64)
    cdef Py_ssize_t n = h.shape[0], j
    out_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef cnp.int64_t prev = -1, cur, floor
    for j in range(n):
        cur = h[j]
        if cur < 0:
            continue
        floor = cur - k
        if prev > floor:
            floor = prev
        if cur > floor:
            out[j] = cur - floor
        if cur > prev:
            prev = cur
    return out_arr
