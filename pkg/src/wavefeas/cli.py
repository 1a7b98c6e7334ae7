"""Command-line interface: ``wavefeas solve|bench|cascade|check``.

Exit codes: 0 success, 1 not converged / check failed, 2 invalid arguments.
"""

import argparse
import json
import logging
import sys

from .constraints import ProblemSpec
from .ensemble import Ensemble
from .harness import run_bench
from .solvers import ALGORITHMS, SolveConfig, two_stage_solve
from .wavelet import FilterPair, cascade, cascade_csv, extract_filters, passes, verify

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def _add_problem_args(p):
    p.add_argument("--problem", choices=("sym", "card"), default="sym")
    p.add_argument("--M", type=int, default=6)
    p.add_argument("--D", type=int, default=1)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--P", type=float, default=None,
                   help="symmetry centre / cardinality point (default 2 for sym, 1 for card)")
    p.add_argument("--symmetry-phase", choices=("4pi", "2pi"), default="4pi")


def _add_solver_args(p):
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--stage1-threshold", type=float, default=1e-2)
    p.add_argument("--max-iters", type=int, default=20000)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wavefeas",
        description="Construct nearly symmetric / nearly cardinal orthogonal wavelets "
                    "with Douglas-Rachford and centering methods.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one two-stage solve and print its RunRecord")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="lt")
    p.add_argument("--trace", action="store_true", help="include the per-iteration gap trace")
    p.add_argument("--out", metavar="FILE", help="write the solution ensemble (JSON) here")

    p = sub.add_parser("bench", help="two-stage benchmark over seeded starts")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--starts", type=int, default=100)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--json", metavar="FILE", help="also write the statistics here")

    p = sub.add_parser("cascade", help="sample phi and psi from filters (CSV)")
    p.add_argument("--filters", metavar="FILE", required=True,
                   help='JSON with {"h": [...], "g": [...]} or an ensemble {"M": .., "free": ..}')
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("check", help="verify an ensemble against a problem's conditions")
    _add_problem_args(p)
    p.add_argument("--ensemble", metavar="FILE", required=True)
    return parser


def _spec(args):
    try:
        return ProblemSpec(kind=args.problem, M=args.M, D=args.D, gamma=args.gamma,
                           P=args.P, symmetry_phase=args.symmetry_phase)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _cmd_solve(args):
    spec = _spec(args)
    try:
        cfg = SolveConfig(spec=spec, tol=args.tol, stage1_threshold=args.stage1_threshold,
                          max_iters=args.max_iters, algorithm=args.algorithm, seed=args.seed,
                          record_trace=args.trace)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    rec = two_stage_solve(cfg)
    print(json.dumps(rec.to_dict()))
    if args.out and rec.solved:
        _write(args.out, Ensemble(rec.solution).to_json() + "\n")
    return EXIT_OK if rec.solved else EXIT_NOT_CONVERGED


def _cmd_bench(args):
    spec = _spec(args)
    if args.starts < 1:
        raise _UsageError("--starts must be >= 1")
    try:
        SolveConfig(spec=spec, tol=args.tol, stage1_threshold=args.stage1_threshold,
                    max_iters=args.max_iters)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    stats, _ = run_bench(spec, args.starts, args.base_seed, args.tol, args.stage1_threshold,
                         args.max_iters, args.workers)
    text = json.dumps(stats.to_dict(), indent=2)
    print(text)
    if args.json:
        _write(args.json, text + "\n")
    return EXIT_OK


def _load_filters(path):
    with open(path) as fh:
        data = json.load(fh)
    if "free" in data:
        return extract_filters(Ensemble.from_dict(data).free)
    return FilterPair.from_dict(data)


def _cmd_cascade(args):
    if args.levels < 1:
        raise _UsageError("--levels must be >= 1")
    x, phi, psi = cascade(_load_filters(args.filters), args.levels)
    text = cascade_csv(x, phi, psi)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_check(args):
    spec = _spec(args)
    with open(args.ensemble) as fh:
        data = json.load(fh)
    if "solution" in data:  # a RunRecord
        data = data["solution"]
        if data is None:
            raise _UsageError("run record has no solution")
    ens = Ensemble.from_dict(data)
    if ens.M != spec.M:
        raise _UsageError(f"ensemble has M={ens.M} but --M={spec.M}")
    report = verify(ens.free, spec)
    report["passes"] = passes(report, excess_tol=1e-9)
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["passes"] else EXIT_NOT_CONVERGED


_COMMANDS = {"solve": _cmd_solve, "bench": _cmd_bench, "cascade": _cmd_cascade, "check": _cmd_check}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"wavefeas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
