"""Command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 not positive definite,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import commtrace, kernels, oracle
from .blockmat import relative_residual
from .errors import FormatError, NotHermitian, NotPositiveDefinite, ShapeMismatch, SinkFailure
from .io import KINDS, GeneratorSpec, generate, load_system, save_solution, save_system
from .solver import SolveOptions, check_positive_definite, solve

EXIT_OK, EXIT_USAGE, EXIT_NOT_PD, EXIT_VERIFY = 0, 1, 2, 3

VERIFY_MAX_DIM = 512
VERIFY_RESIDUAL = 1e-8


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return value


def _n_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("--n-list needs comma-separated integers >= 1")
    return values


def cmd_generate(args) -> int:
    spec = GeneratorSpec(args.n, args.m, args.k, args.seed, args.kind, args.coupling_scale)
    save_system(args.out, generate(spec))
    print(f"generated n={spec.n} m={spec.m} k={spec.k} kind={spec.kind} seed={spec.seed} -> {args.out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    system = load_system(args.inp)
    if system.k < 1:
        print("error: input has no right-hand side (k = 0)", file=sys.stderr)
        return EXIT_USAGE
    opts = SolveOptions(base_threshold=args.threshold, parallel=not args.serial)
    try:
        x, stats = solve(system, opts)
    except NotPositiveDefinite as exc:
        print(f"NOT_PD level={exc.level} block={exc.block_index}")
        return EXIT_NOT_PD
    save_solution(args.out, x)
    if args.stats:
        print(f"levels={stats.levels}\tblock_factorizations={stats.block_factorizations}"
              f"\tbase_case_dim={stats.base_case_dim}\tspan_factorizations={stats.span_factorizations}")
    if args.verify:
        residual = relative_residual(system, x)
        print(f"residual={residual:.3e}")
        if system.n * system.m <= VERIFY_MAX_DIM:
            diff = oracle.max_relative_difference(x, oracle.dense_solve(system))
            print(f"oracle_max_rel_diff={diff:.3e}")
        else:
            print(f"oracle_max_rel_diff=skipped (n*m > {VERIFY_MAX_DIM})")
        if not residual <= VERIFY_RESIDUAL:
            return EXIT_VERIFY
    return EXIT_OK


def cmd_check_pd(args) -> int:
    system = load_system(args.inp)
    report = check_positive_definite(system, SolveOptions(base_threshold=args.threshold))
    print(report.line())
    return EXIT_OK if report.positive_definite else EXIT_NOT_PD


def cmd_comm_trace(args) -> int:
    edges, summary = commtrace.trace_full(args.n, args.threshold)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            commtrace.write_csv(edges, summary, fh)
        print(summary.line())
    else:
        commtrace.write_csv(edges, summary, sys.stdout)
    return EXIT_OK


def _best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cmd_bench(args) -> int:
    print("N\tserial_s\tparallel_s\tlevels\tblock_factorizations\tspan_factorizations")
    for n in args.n_list:
        system = generate(GeneratorSpec(n, args.m, args.k, args.seed, args.kind))
        serial = SolveOptions(base_threshold=args.threshold, parallel=False)
        parallel = SolveOptions(base_threshold=args.threshold, parallel=True)
        _, stats = solve(system, serial)
        t_serial = _best_time(lambda: solve(system, serial), args.repeat)
        t_parallel = _best_time(lambda: solve(system, parallel), args.repeat)
        print(f"{n}\t{t_serial:.6f}\t{t_parallel:.6f}\t{stats.levels}\t"
              f"{stats.block_factorizations}\t{stats.span_factorizations}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cyclic-reduction", description=__doc__.splitlines()[0])
    parser.add_argument("--backend", choices=kernels.available_backends(),
                        help="kernel backend (default: compiled if available)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded test system (BTHP)")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--m", type=_positive, required=True)
    p.add_argument("--k", type=_nonnegative, default=1)
    p.add_argument("--seed", type=_nonnegative, default=0)
    p.add_argument("--kind", choices=KINDS, default="hpd_random")
    p.add_argument("--coupling-scale", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve a BTHP system, write the BTHX solution")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=_positive, default=4)
    p.add_argument("--serial", action="store_true", help="disable the thread pool")
    p.add_argument("--verify", action="store_true", help="print residual and oracle difference")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-pd", help="report whether a BTHP system is positive definite")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--threshold", type=_positive, default=4)
    p.set_defaults(func=cmd_check_pd)

    p = sub.add_parser("comm-trace", help="CSV of node-to-node transfers per level")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--threshold", type=_positive, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_comm_trace)

    p = sub.add_parser("bench", help="time serial vs parallel solves")
    p.add_argument("--n-list", type=_n_list, required=True)
    p.add_argument("--m", type=_positive, default=4)
    p.add_argument("--k", type=_positive, default=1)
    p.add_argument("--seed", type=_nonnegative, default=0)
    p.add_argument("--repeat", type=_positive, default=3)
    p.add_argument("--threshold", type=_positive, default=4)
    p.add_argument("--kind", choices=("hpd_random", "hpd_laplacian", "real_symmetric"), default="hpd_random")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "comm-trace" and args.n < 2:
            parser.error("comm-trace needs --n >= 2")
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.backend:
        kernels.set_backend(args.backend)
    try:
        return args.func(args)
    except (OSError, FormatError, NotHermitian, ShapeMismatch, SinkFailure, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
