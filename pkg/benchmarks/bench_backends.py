"""Benchmark the compiled kernel lane against the pure NumPy lane.

Run:  python benchmarks/bench_backends.py [--quick]

Covers the hot paths: one Lindblad RHS evaluation, blocks of RK4 master
steps (static and time-dependent), pure-state RK4, the Hermitian
eigensolver on dense and near-diagonal matrices, and the Cholesky
positivity probe. Times are min-of-repeats, in milliseconds.

Expected picture: the fused compiled kernels win at small dimensions
(Python/NumPy call overhead dominates there), while both lanes converge
at large dimensions where BLAS zgemm is the whole story; the compiled
Jacobi eigensolver beats LAPACK only on near-diagonal input (threshold
skipping), which is exactly the shape negativity sees along a smooth
trajectory. The one-shot "rhs once" case charges the compiled lane its
per-call operator packing, which the propagators amortize over a block.
"""

import argparse
import sys
import time

import numpy as np

from spinphonon import _backends
from spinphonon._backends import pure


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def _setup(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = np.ascontiguousarray(a + a.conj().T)
    r = a @ a.conj().T
    rho = np.ascontiguousarray(r / np.trace(r).real)
    cops = [np.ascontiguousarray(
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        for _ in range(3)]
    cdags = [np.ascontiguousarray(c.conj().T) for c in cops]
    cdcs = [np.ascontiguousarray(cd @ c) for cd, c in zip(cdags, cops)]
    rates = np.array([0.3, 0.7, 1.1])
    m = np.ascontiguousarray(
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return h, rho, cops, cdags, cdcs, rates, m


def benchmark(lanes, sizes, steps, repeats):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        h, rho, cops, cdags, cdcs, rates, m = _setup(n, rng)
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        psi /= np.linalg.norm(psi)
        near_diag = np.diag(np.arange(n, dtype=float)).astype(complex)
        near_diag[0, 1] = near_diag[1, 0] = 1e-3

        cases = {
            "rhs once": lambda lane: lane.lindblad_rhs(
                rho, h, cops, cdags, cdcs, rates),
            f"master x{steps}": lambda lane: lane.propagate_master(
                rho, h, [], [], cops, cdags, cdcs, rates, 1e-4, 0.0, steps),
            f"master td x{steps}": lambda lane: lane.propagate_master(
                rho, h, [m], [2.0], cops, cdags, cdcs, rates, 1e-4, 0.0,
                steps),
            f"pure psi x{10 * steps}": lambda lane: lane.propagate_pure(
                psi, h, [], [], 1e-4, 0.0, 10 * steps),
            "eig dense": lambda lane: lane.eigvalsh_ascending(h),
            "eig near-diag": lambda lane: lane.eigvalsh_ascending(near_diag),
            "psd probe": lambda lane: lane.min_eig_at_least(rho, 1e-7),
        }
        for label, call in cases.items():
            timings = [_time(lambda lane=lane: call(lane), repeats)
                       for lane in lanes.values()]
            rows.append((n, label, timings))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true",
                        help="fewer sizes and repeats")
    args = parser.parse_args(argv)

    lanes = {"pure": pure}
    if _backends.compiled is not None:
        lanes["compiled"] = _backends.compiled
    else:
        print("note: compiled core not built; benchmarking pure lane only")

    sizes = (18, 42, 98, 169) if args.quick else (18, 42, 98, 169, 225)
    steps = 20 if args.quick else 50
    repeats = 3 if args.quick else 5

    rows = benchmark(lanes, sizes, steps, repeats)
    names = list(lanes)
    header = f"{'dim':>4}  {'kernel':<18}" + "".join(
        f"{name + ' (ms)':>15}" for name in names)
    if len(names) == 2:
        header += f"{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n, label, timings in rows:
        line = f"{n:>4}  {label:<18}" + "".join(
            f"{t:>15.3f}" for t in timings)
        if len(timings) == 2:
            line += f"{timings[0] / timings[1]:>9.2f}"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
