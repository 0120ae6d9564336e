"""Compare the numba and pure-numpy kernel paths.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is warmed up
once (JIT compilation is excluded), checked for agreement between paths,
then timed with the best of several repeats.
"""

import argparse
import time

import numpy as np

from shrinkerlab import _kernels, alcurve
from shrinkerlab.obstruction import moment_tensor, random_symmetric


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(batch, nsteps, count):
    w0 = np.log(np.linspace(0.8, 3.0, batch))
    zeros = np.zeros(batch)
    tau = alcurve._tau_for(3.0)
    a = random_symmetric(np.random.default_rng(0), count, 4).reshape(count, 16)
    mat = np.asarray(moment_tensor(4, 0), dtype=float)
    return {
        f"propagate batch={batch} steps={nsteps}":
            lambda use: _kernels.propagate(w0, zeros, zeros, tau, nsteps, record_every=nsteps, use_numba=use),
        f"advance_to_turn batch={batch}":
            lambda use: _kernels.advance_to_turn(w0, zeros, zeros, tau, 10**6, use_numba=use),
        f"quadform count={count} dim=16":
            lambda use: _kernels.quadform(a, mat, use_numba=use),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=1)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--count", type=int, default=100000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':42s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases(args.batch, args.steps, args.count).items():
        ref, fast = fn(False), fn(True)
        diff = max(float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float))))
                   for x, y in zip(np.atleast_1d(ref) if not isinstance(ref, tuple) else ref,
                                   np.atleast_1d(fast) if not isinstance(fast, tuple) else fast))
        t_np = best_of(lambda: fn(False), args.repeats)
        t_nb = best_of(lambda: fn(True), args.repeats)
        print(f"{name:42s} {t_np:11.4f} {t_nb:11.4f} {t_np / t_nb:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
