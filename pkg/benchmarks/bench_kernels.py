"""Compare the numba kernels with their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--size 65536] [--repeat 20]

Kernel timings call both variants directly. The end-to-end rows run one
European chain simulation per backend in a subprocess, because the backend is
chosen once at import time from STRATMC_DISABLE_NUMBA.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from stratmc import kernels
from stratmc._accel import HAVE_NUMBA

RUN_SNIPPET = """
import time
from stratmc import kernels
from stratmc.chain_sim import run
from stratmc.finance import european_defaults, european_model
from stratmc.rng import SeededStream
params, _ = european_defaults()
model = european_model(params)
kernels.warmup()
run(model, 8, 2, "{sampler}", SeededStream(0))
t0 = time.perf_counter()
for rep in range({reps}):
    run(model, {n}, params.P, "{sampler}", SeededStream(0, (rep,)))
print((time.perf_counter() - t0) / {reps})
"""


def best_of(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(size, repeat):
    rng = np.random.default_rng(0)
    u = rng.random(size)
    s = 100.0 * np.exp(rng.standard_normal(size) * 0.1)
    g = s.copy()
    w = rng.random((size, 2))
    n = int(round(size ** 0.5))
    cell = rng.integers(0, size, size)
    cases = {
        "norm_ppf": (lambda: kernels.norm_ppf_numba(u), lambda: kernels.norm_ppf_numpy(u)),
        "gbm_advance": (lambda: kernels.gbm_advance_numba(s, u, 0.001, 0.02),
                        lambda: kernels.gbm_advance_numpy(s, u, 0.001, 0.02)),
        "asian_advance": (lambda: kernels.asian_advance_numba(s, g, u, 0.001, 0.02, 3),
                          lambda: kernels.asian_advance_numpy(s, g, u, 0.001, 0.02, 3)),
        "select_index": (lambda: kernels.select_index_numba(w, 1, n, 1),
                         lambda: kernels.select_index_numpy(w, 1, n, 1)),
        "place": (lambda: kernels.place_numba(cell, u, float(size), cell, float(size)),
                  lambda: kernels.place_numpy(cell, u, float(size), cell, float(size))),
    }
    for name, (fast, slow) in cases.items():
        yield name, best_of(fast, repeat), best_of(slow, repeat)


def run_time(sampler, n, reps, disable):
    env = dict(os.environ, STRATMC_DISABLE_NUMBA="1" if disable else "0")
    code = RUN_SNIPPET.format(sampler=sampler, n=n, reps=reps)
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=65536, help="array length for kernel timings")
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=64, help="base for the end-to-end run (N = n**2)")
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args(argv)

    if not HAVE_NUMBA:
        print("numba is not installed; both columns time the numpy path")
    print(f"{'kernel':<16} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for name, fast, slow in kernel_rows(args.size, args.repeat):
        print(f"{name:<16} {fast * 1e3:>10.3f} {slow * 1e3:>10.3f} {slow / fast:>8.1f}")
    print()
    print(f"European chain, N={args.n ** 2}, P=100, seconds per run")
    for sampler in ("smc", "ss"):
        fast = run_time(sampler, args.n, args.reps, disable=False)
        slow = run_time(sampler, args.n, args.reps, disable=True)
        print(f"{sampler:<16} {fast:>10.3f} {slow:>10.3f} {slow / fast:>8.1f}")


if __name__ == "__main__":
    main()
