"""Pure-Python implementations of the numerical kernels.

These mirror ``_core.pyx`` line for line and are used whenever the compiled
extension is unavailable (or ``VOA_PURE_PYTHON=1`` is set).
"""

import math

import numpy as np


def truncated_poisson_mean(mean, k):
    """Return ``E[min(A, k)]`` for ``A ~ Poisson(mean)``.

    For ``k <= mean`` the finite sum ``k - sum_{i<k} (k-i) p_i`` is used; for
    ``k > mean`` the complementary tail ``mean - sum_{i>k} (i-k) p_i`` avoids
    cancellation when almost all the mass sits below ``k``.  Poisson terms are
    carried in log space, so ``mean`` far beyond 745 does not underflow.
    """
    k = int(k)
    if k <= 0 or mean <= 0.0:
        return 0.0
    log_mean = math.log(mean)
    if k <= mean:
        logp = -mean
        acc = 0.0
        for i in range(k):
            acc += (k - i) * math.exp(logp)
            logp += log_mean - math.log(i + 1)
        return k - acc
    i = k + 1
    logp = -mean + i * log_mean - math.lgamma(i + 1.0)
    tail = 0.0
    while True:
        term = (i - k) * math.exp(logp)
        tail += term
        if i + 1 > 2.0 * mean and term <= 1e-17 * mean:
            break
        i += 1
        logp += log_mean - math.log(i)
    return mean - tail


def geometric_moment_sums(r, k):
    """Return ``(sum_{i=0}^k r**i, sum_{i=0}^k i * r**i)``.

    Both sums use Kahan compensation; powers come from a running product.
    """
    k = int(k)
    s0 = 0.0
    c0 = 0.0
    s1 = 0.0
    c1 = 0.0
    p = 1.0
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


def fifo_novelty(hi, k):
    """Count never-before-seen posts in each of a sequence of FIFO windows.

    ``hi[j]`` is the index of the newest post visible at access ``j`` (``-1``
    when no post exists yet); the window holds indices
    ``max(hi[j] - k + 1, 0) .. hi[j]``.  Indices must be non-decreasing, which
    makes the set of already-seen posts inside a window a prefix ending at the
    largest earlier ``hi``.
    """
    k = int(k)
    out = np.zeros(len(hi), dtype=np.int64)
    prev = -1
    for j, h in enumerate(np.asarray(hi, dtype=np.int64).tolist()):
        if h < 0:
            continue
        floor = h - k
        if prev > floor:
            floor = prev
        if h > floor:
            out[j] = h - floor
        if h > prev:
            prev = h
    return out
