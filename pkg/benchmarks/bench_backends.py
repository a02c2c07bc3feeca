"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_backends.py [--n-list 256,1024,4096] [--m 4] [--repeat 3]

Prints per-kernel timings (single m x m block, many calls) and full solve
timings for each backend, plus the cython/python speedup.
"""

import argparse
import time

import numpy as np

from cyclic_reduction import kernels
from cyclic_reduction.io import GeneratorSpec, generate
from cyclic_reduction.solver import SolveOptions, solve


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(m, rng):
    R = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    M = R @ R.conj().T + m * np.eye(m)
    M = (M + M.conj().T) / 2
    G = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    L = kernels.cholesky(M)
    return {
        "cholesky": lambda: kernels.cholesky(M),
        "solve_hermitian": lambda: kernels.solve_hermitian(L, G),
        "stable_schur_term": lambda: kernels.stable_schur_term(L, G),
        "matmul_acc": lambda: kernels.matmul_acc(-1.0, G, "conj_transpose", G, "plain", M),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-list", default="256,1024,4096")
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--calls", type=int, default=2000)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the python backend is available")
    prev = kernels.get_backend()
    kernel_times, solve_times = {}, {}
    ns = [int(v) for v in args.n_list.split(",")]
    for name in backends:
        kernels.set_backend(name)
        for kname, fn in kernel_cases(args.m, np.random.default_rng(0)).items():
            t = best_of(lambda: [fn() for _ in range(args.calls)], args.repeat)
            kernel_times[name, kname] = t / args.calls
        for n in ns:
            system = generate(GeneratorSpec(n, args.m, args.k, seed=1))
            opts = SolveOptions(parallel=False)
            solve_times[name, n] = best_of(lambda: solve(system, opts), args.repeat)
    kernels.set_backend(prev)

    def row(label, key_fn):
        cells = [f"{key_fn(b):.3e}" for b in backends]
        if len(backends) == 2:
            cells.append(f"{key_fn('python') / key_fn('cython'):.1f}x")
        print("\t".join([label] + cells))

    header = ["case"] + [f"{b}_s" for b in backends] + (["speedup"] if len(backends) == 2 else [])
    print(f"# m={args.m}; kernel rows are seconds per call, solve rows are seconds per serial solve")
    print("\t".join(header))
    for kname in ("cholesky", "solve_hermitian", "stable_schur_term", "matmul_acc"):
        row(kname, lambda b: kernel_times[b, kname])
    for n in ns:
        row(f"solve N={n}", lambda b: solve_times[b, n])


if __name__ == "__main__":
    main()
