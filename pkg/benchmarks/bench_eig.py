"""Compare the jitted Jacobi eigensolver against numpy's eigh.

Times the raw kernels directly, then times a full verification sweep
under each backend in a child process (backend choice is resolved once
per process, so the sweep comparison cannot run in-process).

Usage: python benchmarks/bench_eig.py [--sizes 4,8,16,32,64]
       [--repeats 50] [--trials 20]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qpool._jacobi import jacobi_eigh


def _hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return np.ascontiguousarray((g + g.conj().T) / 2)


def _time(fn, mats, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for m in mats:
            fn(m)
        best = min(best, (time.perf_counter() - t0) / len(mats))
    return best


def bench_kernels(sizes, repeats):
    rng = np.random.default_rng(0)
    jacobi_eigh(_hermitian(rng, 4))  # trigger JIT before timing
    print(f"{'n':>4} {'jacobi (us)':>12} {'eigh (us)':>12} {'ratio':>7} {'max |dw|':>10}")
    for n in sizes:
        mats = [_hermitian(rng, n) for _ in range(8)]
        tj = _time(lambda m: jacobi_eigh(m), mats, repeats)
        tn = _time(np.linalg.eigh, mats, repeats)
        dw = 0.0
        for m in mats:
            w, _, ok = jacobi_eigh(m)
            assert ok
            dw = max(dw, np.abs(np.sort(w) - np.linalg.eigvalsh(m)).max())
        print(f"{n:>4} {tj * 1e6:>12.1f} {tn * 1e6:>12.1f} {tj / tn:>7.2f} {dw:>10.2e}")


def bench_sweep(trials):
    code = (
        "import time, qpool; qpool.warm_up(); t0 = time.perf_counter(); "
        f"r = qpool.verification_sweep(qpool.SweepConfig(category='i', trials={trials}, seed=0)); "
        "print(f'{time.perf_counter() - t0:.3f}s  passed={r.passed}  '"
        "f'max_distance={r.max_distance:.2e}')"
    )
    for backend in ("numba", "numpy"):
        env = dict(os.environ, QPOOL_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        if out.returncode != 0:
            print(f"{backend:>6}: failed\n{out.stderr}", file=sys.stderr)
            continue
        print(f"{backend:>6}: {out.stdout.strip()}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="4,8,16,32,64")
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--trials", type=int, default=20)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print("kernel timings (best of repeats, per matrix):")
    bench_kernels(sizes, args.repeats)
    print(f"\nverification sweep, class i, {args.trials} trials:")
    bench_sweep(args.trials)


if __name__ == "__main__":
    main()
