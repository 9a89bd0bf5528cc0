"""Time the numba and numpy local-operator kernels on random states.

    python3 benchmarks/bench_kernels.py --qubits 10 14 18 --repeat 20
"""

import argparse
import timeit

import numpy as np

from relcollapse import _kernels


def random_unitary(d, rng):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def bench(n_qubits, k_targets, repeat, rng):
    dims = np.full(n_qubits, 2, dtype=np.int64)
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    targets = np.sort(rng.choice(n_qubits, size=k_targets, replace=False)).astype(np.int64)
    mat = random_unitary(2**k_targets, rng)

    a = _kernels.apply_matrix_numba(amps, dims, targets, mat)  # compile outside the timing
    b = _kernels.apply_matrix_numpy(amps, dims, targets, mat)
    err = float(np.abs(a - b).max())

    t_jit = min(timeit.repeat(lambda: _kernels.apply_matrix_numba(amps, dims, targets, mat), number=1, repeat=repeat))
    t_np = min(timeit.repeat(lambda: _kernels.apply_matrix_numpy(amps, dims, targets, mat), number=1, repeat=repeat))
    return t_jit, t_np, err


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[6, 10, 14, 18])
    ap.add_argument("--targets", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'qubits':>6} {'k':>2} {'numba [us]':>11} {'numpy [us]':>11} {'speedup':>8} {'max|diff|':>10}")
    for n in args.qubits:
        for k in args.targets:
            if k > n:
                continue
            t_jit, t_np, err = bench(n, k, args.repeat, rng)
            print(f"{n:>6} {k:>2} {t_jit * 1e6:>11.1f} {t_np * 1e6:>11.1f} {t_np / t_jit:>8.2f} {err:>10.2e}")


if __name__ == "__main__":
    main()
