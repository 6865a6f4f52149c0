"""CLI invocations whose reports are pinned byte-for-byte under tests/golden."""

from pathlib import Path

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"

# (golden file stem, argv without the problem path, fixture, expected exit code)
CASES = [
    ("w0_absdiff.solve", ["solve"], "w0_absdiff.json", 0),
    ("w0_absdiff.check_feasible", ["check", "--feasible"], "w0_absdiff.json", 0),
    ("xy_product.solve_monotone", ["solve", "--monotone", "--m-max", "2"], "xy_product.json", 0),
    ("xy_product.check_monotone", ["check", "--monotone"], "xy_product.json", 0),
    ("martingale_4pt.solve", ["solve", "--normalize-potentials"], "martingale_4pt.json", 0),
    ("martingale_4pt.solve_monotone", ["solve", "--monotone", "--seed", "7"], "martingale_4pt.json", 0),
    ("martingale_4pt.bounds", ["bounds"], "martingale_4pt.json", 0),
    ("martingale_dirac.bounds", ["bounds"], "martingale_dirac.json", 0),
    ("martingale_infeasible.solve", ["solve"], "martingale_infeasible.json", 2),
    ("martingale_infeasible.bounds", ["bounds"], "martingale_infeasible.json", 2),
    ("martingale_infeasible.check_feasible", ["check", "--feasible"], "martingale_infeasible.json", 2),
    ("swap_group.solve", ["solve"], "swap_group.json", 0),
    ("compat_violation.check_compat", ["check", "--marginal-compat"], "compat_violation.json", 2),
    ("unbounded_lp.solve", ["solve"], "unbounded_lp.json", 3),
]


def argv(case, out=None):
    stem, args, fixture, _ = case
    full = [args[0], str(FIXTURES / fixture)] + args[1:]
    if out is not None:
        full += ["--out", str(out)]
    return full
