"""Command-line front end: ``constrained-ot {solve,check,bounds} PROBLEM.json``.

Exit codes: 0 success (optimal / check passed), 1 input error, 2 infeasible or
check failed, 3 unbounded.
"""

from __future__ import annotations

import argparse
import sys

from . import reports
from .constraints import check_marginal_compatibility
from .fileformat import ProblemFileError, build, build_lp, dumps, load_problem
from .lp import LPBreakdownError, Status, solve_lp
from .martingale import MartingaleInfeasibleError, MartingaleProblem, price_bounds
from .monotonicity import verify_solution_monotone
from .solver import check_feasible, solve_primal

EXIT_OK, EXIT_INPUT, EXIT_FAIL, EXIT_UNBOUNDED = 0, 1, 2, 3
_STATUS_EXIT = {Status.OPTIMAL: EXIT_OK, Status.INFEASIBLE: EXIT_FAIL, Status.UNBOUNDED: EXIT_UNBOUNDED}


def _emit(obj, out):
    text = dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    pf = load_problem(args.problem)
    if pf.is_lp:
        sol = solve_lp(build_lp(pf))
        _emit(reports.lp_report(sol), args.out)
        return _STATUS_EXIT[sol.status]
    built = build(pf)
    report = solve_primal(built.problem, normalize=args.normalize_potentials)
    verdict = None
    if args.monotone and report.optimal:
        verdict = verify_solution_monotone(report, built.problem, m_max=args.m_max,
                                           trials=args.trials, tol=args.tol, seed=args.seed)
    _emit(reports.solve_report(built, report, verdict), args.out)
    return _STATUS_EXIT[report.status]


def cmd_check(args) -> int:
    pf = load_problem(args.problem)
    if pf.is_lp:
        raise ProblemFileError("lp", "checks need a transport problem, not a bare LP")
    built = build(pf)
    if args.feasible:
        res = check_feasible(built.problem)
        out, passed = reports.feasibility_report(built, res), res.feasible
    elif args.marginal_compat:
        rep = check_marginal_compatibility(built.problem.constraints, built.problem.marginals)
        out, passed = reports.compatibility_report(rep), rep.compatible
    else:
        report = solve_primal(built.problem)
        verdict = None
        if report.optimal:
            verdict = verify_solution_monotone(report, built.problem, m_max=args.m_max,
                                               trials=args.trials, tol=args.tol, seed=args.seed)
        out = reports.monotone_check_report(built, report, verdict)
        passed = verdict is not None and verdict.passed
    _emit(out, args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_bounds(args) -> int:
    pf = load_problem(args.problem)
    if pf.is_lp or pf.constraint_type != "martingale":
        raise ProblemFileError("constraints.type", "bounds needs martingale constraints")
    built = build(pf)
    mp = MartingaleProblem(built.problem.marginals, built.problem.cost)
    try:
        b = price_bounds(mp)
    except MartingaleInfeasibleError as exc:
        _emit(reports.infeasible_bounds_report(built, exc.report, exc.convex_order), args.out)
        return EXIT_FAIL
    _emit(reports.bounds_report(built, b), args.out)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem file (JSON)")
    common.add_argument("--out", help="write the report here instead of standard output")
    common.add_argument("--seed", type=int, default=42, help="seed for sampled monotonicity checks")
    common.add_argument("--tol", type=float, default=1e-7, help="monotonicity tolerance")
    common.add_argument("--m-max", type=int, default=3, help="largest support subset examined")
    common.add_argument("--trials", type=int, default=50, help="random weightings (and subsets) per check")

    parser = argparse.ArgumentParser(prog="constrained-ot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="solve the constrained transport problem")
    p.add_argument("--normalize-potentials", action="store_true",
                   help="shift potentials so f_k(first point) = 0 for k >= 2")
    p.add_argument("--monotone", action="store_true", help="also check monotonicity of the optimal support")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", parents=[common], help="run one diagnostic")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--feasible", action="store_true", help="does any admissible coupling exist")
    which.add_argument("--marginal-compat", action="store_true",
                       help="single-coordinate generators must integrate to zero")
    which.add_argument("--monotone", action="store_true", help="monotonicity of the optimal support")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bounds", parents=[common], help="martingale price bounds")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"constrained-ot: {args.problem}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"constrained-ot: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LPBreakdownError as exc:
        print(f"constrained-ot: numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
