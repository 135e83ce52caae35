"""Command-line surface: norms, dimensions, partitions, decomposition, suite.

Every subcommand is deterministic given its flags; randomness is seeded
explicitly and no global state is consulted.  BLAS backends inside numpy
honor the usual thread-count environment variable (OMP_NUM_THREADS); no
other environment configuration exists — semantics flow through flags.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import RunConfig
from .core import IntMatrix, round_half_down
from .factorize import GammaFactorization, gamma2_bracket, verify_factorization
from .formats import (
    dump_decomposition,
    dump_factorization,
    dump_matrix,
    dump_report,
    load_decomposition,
    load_factorization,
    load_int_matrix,
    load_matrix,
)
from .generators import KINDS, GeneratorSpec, generate
from .littlestone import DEFAULT_BUDGET, ldim, ldim_alpha
from .partition import greedy_partition
from .pipeline import decompose, exact_block_complexity
from .suite import run_suite

__all__ = ["main"]


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=int, default=16, help="random solver restarts (default 16)")
    p.add_argument("--max-iter", type=int, default=400, help="ascent iterations per restart")
    p.add_argument("--tol", type=float, default=1e-9, help="certificate residual tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomized paths")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="blockydecomp",
        description="Decompose bounded-norm integer matrices into signed sums of blocky matrices.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma2", help="two-sided factorization-norm estimate")
    p.add_argument("--input", required=True)
    _add_solver_flags(p)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="dimension-recursion node budget")
    p.add_argument("--out", help="write the upper-bound factorization to this JSON file")

    p = sub.add_parser("ldim", help="exact mistake-tree dimension of a sign matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = sub.add_parser("ldim-alpha", help="exact weighted mistake-tree dimension")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    p = sub.add_parser("partition", help="greedy constant-class column partition")
    p.add_argument("--input", required=True)
    p.add_argument("--check-bound", action="store_true", help="re-verify the density cap on the delta grid")

    p = sub.add_parser("decompose", help="full signed blocky decomposition")
    p.add_argument("--input", required=True)
    p.add_argument("--factorization", help="JSON certificate; computed when omitted")
    p.add_argument("--gamma", type=float, help="refuse if the certificate norm exceeds this")
    _add_solver_flags(p)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--force", action="store_true", help="proceed on a non-certifying factorization")
    p.add_argument("--out", required=True, help="decomposition JSON output path")
    p.add_argument("--report", required=True, help="report JSON output path")

    p = sub.add_parser("verify", help="re-evaluate a decomposition against a matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--decomp", required=True)

    p = sub.add_parser("oracle", help="exact block complexity by exhaustive search")
    p.add_argument("--input", required=True)
    p.add_argument("--max-l", type=int, default=6)

    p = sub.add_parser("gen", help="generate a test matrix (optionally with certificate)")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--terms", type=int, default=3, help="term count for random-blocky-sum")
    p.add_argument("--support", default="", help="comma-separated subset of Z_n for convolution-cyclic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--sum", dest="sum_path", help="also write the generating blocky sum")
    p.add_argument("--cert", help="also write the exact factorization certificate")

    p = sub.add_parser("suite", help="run the acceptance battery")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--max-iter", type=int, default=400)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--oracle-depth", type=int, default=6)
    p.add_argument("--select", default="", help="comma-separated criterion numbers (default: all)")
    p.add_argument("--out-dir", help="write results.json and data tables here")
    return ap


def _cmd_gamma2(args) -> int:
    A = load_matrix(args.input)
    bracket = gamma2_bracket(
        np.asarray(A, dtype=np.float64),
        restarts=args.restarts,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
        budget=args.budget,
    )
    fac = bracket.upper_witness
    certifying = fac.certifies(args.tol)
    print(f"lower bound: {bracket.lower:.9g} via {bracket.lower_witness}")
    print(
        f"upper bound: {fac.gamma:.9g} (residual {fac.residual:.3e}, "
        f"{'certifying' if certifying else 'NOT certifying'} at tol {args.tol:g})"
    )
    if args.out:
        dump_factorization(fac.U, fac.V, fac.gamma, fac.residual, args.out)
        print(f"factorization written to {args.out}")
    return 0


def _cmd_ldim(args) -> int:
    A = load_matrix(args.input)
    print(ldim(np.asarray(A, dtype=np.float64), budget=args.budget))
    return 0


def _cmd_ldim_alpha(args) -> int:
    A = load_matrix(args.input)
    print(ldim_alpha(np.asarray(A, dtype=np.float64), args.alpha, budget=args.budget))
    return 0


def _cmd_partition(args) -> int:
    A = load_int_matrix(args.input)
    arr = A.values
    keep = arr.any(axis=0)
    if not keep.all():
        dropped = int((~keep).sum())
        print(f"stripping {dropped} all-zero column(s)")
        arr = arr[:, keep]
    gp = greedy_partition(arr)
    for i, cls in enumerate(gp.classes):
        print(f"class {i}: (x={cls.row}, b={cls.value}, size={len(cls.columns)}, members={list(cls.columns)})")
    deltas = (0.5, 0.25, 0.1, 0.05)
    size = arr.shape[1]
    import math

    ceiling = math.log(size) + 1
    print(f"density table (columns: delta={deltas}, cap=(ln {size}+1)/delta)")
    values = sorted(int(v) for v in np.unique(arr) if v != 0)
    violations = 0
    for x in range(arr.shape[0]):
        for b in values:
            counts = [gp.dense_class_count(x, b, d) for d in deltas]
            if not any(counts):
                continue
            print(f"  x={x} b={b}: counts={counts}")
            if args.check_bound:
                for d, c in zip(deltas, counts):
                    if c > ceiling / d + 1e-9:
                        violations += 1
    if args.check_bound:
        print(f"density bound check: {violations} violations")
        return 0 if violations == 0 else 1
    return 0


def _cmd_decompose(args) -> int:
    A = load_int_matrix(args.input)
    fac = None
    if args.factorization:
        U, V, gamma, residual = load_factorization(args.factorization)
        fac = GammaFactorization(U=U, V=V, gamma=gamma, residual=residual)
    s, report = decompose(
        A.values,
        fac=fac,
        tol=args.tol,
        restarts=args.restarts,
        max_iter=args.max_iter,
        seed=args.seed,
        budget=args.budget,
        force=args.force,
    )
    gamma0 = report.gamma_squared_trajectory[0] ** 0.5
    if args.gamma is not None and gamma0 > args.gamma and not args.force:
        print(
            f"error: certificate norm {gamma0:.6f} exceeds the requested bound {args.gamma:.6f}",
            file=sys.stderr,
        )
        return 2
    dump_decomposition(s, args.out)
    dump_report(report.to_json_dict(), args.report)
    print(
        f"decomposed exactly into {len(s)} signed blocky terms over {len(report.levels)} levels "
        f"(gamma {gamma0:.6f}); wrote {args.out} and {args.report}"
    )
    return 0


def _cmd_verify(args) -> int:
    A = load_int_matrix(args.input)
    s = load_decomposition(args.decomp)
    if s.shape != A.shape:
        print(f"shape mismatch: decomposition {s.shape} vs matrix {A.shape}", file=sys.stderr)
        return 1
    rebuilt = s.evaluate()
    if np.array_equal(rebuilt, A.values):
        print(f"ok: {len(s)} terms re-evaluate exactly to the {A.m}x{A.n} input")
        return 0
    diff = np.argwhere(rebuilt != A.values)
    x, y = (int(v) for v in diff[0])
    print(
        f"MISMATCH at ({x},{y}): expected {int(A.values[x, y])}, got {int(rebuilt[x, y])} "
        f"({diff.shape[0]} differing entries)",
        file=sys.stderr,
    )
    return 1


def _cmd_oracle(args) -> int:
    A = load_int_matrix(args.input)
    v = exact_block_complexity(A.values, args.max_l)
    print(f"exceeds {args.max_l}" if v is None else v)
    return 0


def _cmd_gen(args) -> int:
    support = tuple(int(s) for s in args.support.split(",") if s != "")
    spec = GeneratorSpec(
        kind=args.kind,
        n=args.n,
        m=args.m,
        density=args.density,
        term_count=args.terms,
        support=support,
    )
    inst = generate(spec, seed=args.seed)
    dump_matrix(inst.matrix, args.out, fmt=args.format)
    print(f"wrote {inst.matrix.m}x{inst.matrix.n} {args.kind} matrix to {args.out}")
    if args.sum_path:
        if inst.blocky_sum is None:
            print("error: --sum is only available for random-blocky-sum", file=sys.stderr)
            return 2
        dump_decomposition(inst.blocky_sum, args.sum_path)
        print(f"wrote generating sum ({len(inst.blocky_sum)} terms) to {args.sum_path}")
    if args.cert:
        if inst.certificate is None:
            print("error: --cert is only available for random-blocky-sum", file=sys.stderr)
            return 2
        fac = inst.certificate
        dump_factorization(fac.U, fac.V, fac.gamma, fac.residual, args.cert)
        print(f"wrote certificate (gamma {fac.gamma:g}) to {args.cert}")
    return 0


def _cmd_suite(args) -> int:
    selection = None
    if args.select:
        selection = [int(s) for s in args.select.split(",") if s != ""]
    config = RunConfig(
        seed=args.seed,
        tol=args.tol,
        restarts=args.restarts,
        max_iter=args.max_iter,
        littlestone_budget=args.budget,
        oracle_depth=args.oracle_depth,
    )
    code, _ = run_suite(config, selection=selection, out_dir=args.out_dir)
    return code


_HANDLERS = {
    "gamma2": _cmd_gamma2,
    "ldim": _cmd_ldim,
    "ldim-alpha": _cmd_ldim_alpha,
    "partition": _cmd_partition,
    "decompose": _cmd_decompose,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
    "gen": _cmd_gen,
    "suite": _cmd_suite,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
