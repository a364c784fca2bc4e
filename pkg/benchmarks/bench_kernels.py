#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Also times one end-to-end workload per backend (the quadrature oracle over a
36-point grid and a 24-point trace-driven sweep) by running it in a child
process with ``VOA_PURE_PYTHON`` set or unset.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from voa.kernels import available_backends

E2E = r"""
import itertools, time
from voa.kernels import BACKEND
from voa.model import ModelParams, voa_quadrature_oracle
from voa.simulator import SimConfig, sweep_inverse_mu, synthetic_poisson_trace
t = time.perf_counter()
for k, lam, mu in itertools.product([1, 5, 10, 50], [0.1, 1, 4.487], [0.04, 0.5, 1]):
    voa_quadrature_oracle(ModelParams(lam, mu, k))
quad = time.perf_counter() - t
posts = synthetic_poisson_trace(4.487, 336, seed=1)
cfg = SimConfig(k=10, sample_interval_hours=1, period_hours=336, rounds=30, seed=7)
t = time.perf_counter()
sweep_inverse_mu(posts, cfg, range(1, 25), lam=4.487)
sweep = time.perf_counter() - t
print(BACKEND, quad, sweep)
"""


def _cases():
    rng = np.random.default_rng(0)
    hi = np.sort(rng.integers(0, 10**6, size=200_000))
    return {
        "truncated_poisson_mean(500, 400)": lambda m: m.truncated_poisson_mean(500.0, 400),
        "truncated_poisson_mean(50, 10**4)": lambda m: m.truncated_poisson_mean(50.0, 10**4),
        "geometric_moment_sums(0.99, 10**5)": lambda m: m.geometric_moment_sums(0.99, 10**5),
        "fifo_novelty(2e5 windows, k=10)": lambda m: m.fifo_novelty(hi, 10),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available", file=sys.stderr)

    print(f"{'kernel':40s}" + "".join(f"{name:>14s}" for name in backends) + f"{'speedup':>10s}")
    for label, fn in _cases().items():
        times = {}
        for name, mod in backends.items():
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:40s}" + "".join(f"{times[n] * 1e3:12.3f}ms" for n in backends)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)

    print()
    print(f"{'end to end':40s}{'quadrature grid':>18s}{'trace sweep':>14s}")
    for name in backends:
        env = dict(os.environ)
        env.pop("VOA_PURE_PYTHON", None)
        if name == "python":
            env["VOA_PURE_PYTHON"] = "1"
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        backend, quad, sweep = out.stdout.split()
        print(f"{backend:40s}{float(quad):17.3f}s{float(sweep):13.3f}s")


if __name__ == "__main__":
    main()
