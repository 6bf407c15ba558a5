"""Command line entry point.

Subcommands: gen (write a problem file), exact (print exact condition
numbers), estimate (run the statistical estimators), table1/table2/table3
(ratio experiments), compare (structured versus unstructured values).
"""

import argparse
import sys

import numpy as np

from . import bench, probfile
from .estimate import SsceConfig, estimate_kappa2_pce, estimate_kappa2_ssce, \
    estimate_kappa_inf_ssce
from .exact import CondParams, kappa_2ils, kappa_componentwise, kappa_mixed
from .structured import (
    StructuredParams,
    basis_from_token,
    basis_token,
    kappa_2ils_structured,
    kappa_componentwise_structured,
    kappa_mixed_structured,
    make_basis,
)


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str, default=None)


def _add_estimator_flags(parser):
    parser.add_argument("--delta", type=float, default=1e-2)
    parser.add_argument("--epsilon", type=float, default=1e-3)
    parser.add_argument("--k", type=int, default=3)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="ilscond",
        description="Condition numbers of indefinite least squares problems "
                    "and their statistical estimates.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a problem and write it to a file")
    gen.add_argument("--example", choices=("ex1", "ex2", "ex3"), default="ex1")
    gen.add_argument("--m", type=int, default=20)
    gen.add_argument("--n", type=int, default=8)
    gen.add_argument("--p", type=int, default=14)
    gen.add_argument("--l", type=float, default=1.0,
                     help="condition exponent for ex1 (kappa = n^l)")
    gen.add_argument("--kappa", type=float, default=1e4,
                     help="target condition number for ex2")
    gen.add_argument("--rho", type=float, default=1.0)
    _add_common(gen)

    exact = sub.add_parser("exact", help="print exact condition numbers")
    exact.add_argument("problem", type=str)

    est = sub.add_parser("estimate", help="run the statistical estimators")
    est.add_argument("problem", type=str)
    _add_estimator_flags(est)
    est.add_argument("--seed", type=int, default=0)

    for name in ("table1", "table2", "table3"):
        tp = sub.add_parser(name, help=f"reproduce experiment {name}")
        tp.add_argument("--full", action="store_true",
                        help="published problem sizes (minutes-scale run)")
        tp.add_argument("--m", type=int, default=None)
        tp.add_argument("--n", type=int, default=None)
        tp.add_argument("--p", type=int, default=None)
        tp.add_argument("--trials", type=int, default=None)
        tp.add_argument("--format", choices=("csv", "json"), default="csv")
        _add_estimator_flags(tp)
        _add_common(tp)

    cmp_ = sub.add_parser("compare",
                          help="structured vs unstructured condition numbers")
    cmp_.add_argument("problem", type=str)
    return ap


def _print_exact(problem, structure):
    params = CondParams()
    print(f"problem: m={problem.m} n={problem.n} p={problem.p} q={problem.q}")
    print(f"kappa_2    = {kappa_2ils(problem, params):.6e}")
    print(f"kappa_mixed = {kappa_mixed(problem, params):.6e}")
    print(f"kappa_comp  = {kappa_componentwise(problem, params):.6e}")
    if structure:
        sparams = StructuredParams(
            basis_from_token(structure, problem.m, problem.n),
            make_basis("full", problem.m),
        )
        print(f"kappa_2^S    = {kappa_2ils_structured(problem, params, sparams):.6e}")
        print(f"kappa_mixed^S = {kappa_mixed_structured(problem, params, sparams):.6e}")
        print(f"kappa_comp^S  = {kappa_componentwise_structured(problem, params, sparams):.6e}")


def _cmd_gen(args):
    if args.example == "ex1":
        problem, _, _ = bench.gen_example1(args.m, args.n, args.p, args.l,
                                           args.rho, args.seed)
        structure = None
    elif args.example == "ex2":
        problem, _, _ = bench.gen_example2(args.m, args.n, args.p, args.kappa,
                                           args.rho, args.seed)
        structure = None
    else:
        problem, sparams, _, _ = bench.gen_example3(args.n, args.rho, args.seed)
        structure = basis_token(sparams.basisA)
    out = args.out or "problem.txt"
    probfile.save_problem(out, problem, structure=structure)
    print(f"wrote {out} ({problem.m}x{problem.n}, p={problem.p}, q={problem.q}"
          + (f", {structure}" if structure else "") + ")")
    return 0


def _cmd_exact(args):
    problem, structure = probfile.load_problem(args.problem)
    _print_exact(problem, structure)
    return 0


def _cmd_estimate(args):
    problem, _ = probfile.load_problem(args.problem)
    params = CondParams()
    seeds = np.random.SeedSequence(args.seed).spawn(3)
    est, interval = estimate_kappa2_pce(
        problem, params, delta=args.delta, epsilon=args.epsilon,
        seed=seeds[0], return_interval=True,
    )
    flag = " (ratio target not met)" if interval.ratio_not_met else ""
    print(f"kappa_2 probabilistic = {est:.6e} "
          f"[{interval.alpha1:.6e}, {interval.alpha2:.6e}]{flag}")
    ssce = estimate_kappa2_ssce(problem, params, SsceConfig(k=args.k, seed=seeds[1]))
    print(f"kappa_2 small-sample  = {ssce:.6e}")
    sm, sc = estimate_kappa_inf_ssce(problem, params,
                                     SsceConfig(k=args.k, seed=seeds[2]))
    print(f"kappa_mixed small-sample = {sm:.6e}")
    print(f"kappa_comp  small-sample = {sc:.6e}")
    return 0


def _cmd_table(name, args):
    factory = {"table1": bench.table1_config, "table2": bench.table2_config,
               "table3": bench.table3_config}[name]
    overrides = {"seed": args.seed, "delta": args.delta,
                 "epsilon": args.epsilon, "k": args.k}
    for dim in ("m", "n", "p", "trials"):
        val = getattr(args, dim)
        if val is not None:
            overrides[dim] = val
    if args.full:
        print("running at published sizes; this takes minutes", file=sys.stderr)
    config = factory(full=args.full, **overrides)
    result = bench.run_experiment(config)
    print(result.format_table())
    if args.out:
        if args.format == "csv":
            result.to_csv(args.out)
        else:
            result.to_json(args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_compare(args):
    problem, structure = probfile.load_problem(args.problem)
    if not structure:
        print("problem file carries no structure kind; nothing to compare",
              file=sys.stderr)
        return 1
    params = CondParams()
    sparams = StructuredParams(
        basis_from_token(structure, problem.m, problem.n),
        make_basis("full", problem.m),
    )
    k2 = kappa_2ils(problem, params)
    k2s = kappa_2ils_structured(problem, params, sparams)
    km = kappa_mixed(problem, params)
    kms = kappa_mixed_structured(problem, params, sparams)
    kc = kappa_componentwise(problem, params)
    kcs = kappa_componentwise_structured(problem, params, sparams)
    print(f"structure: {structure}")
    print(f"kappa_2    = {k2:.6e}  structured = {k2s:.6e}  ratio = {k2 / k2s:.4f}")
    print(f"kappa_mixed = {km:.6e}  structured = {kms:.6e}  ratio = {km / kms:.4f}")
    print(f"kappa_comp  = {kc:.6e}  structured = {kcs:.6e}  ratio = {kc / kcs:.4f}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        return _cmd_gen(args)
    if args.command == "exact":
        return _cmd_exact(args)
    if args.command == "estimate":
        return _cmd_estimate(args)
    if args.command in ("table1", "table2", "table3"):
        return _cmd_table(args.command, args)
    if args.command == "compare":
        return _cmd_compare(args)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
