"""Machine-readable report dictionaries and their independent re-checking."""

from __future__ import annotations

import numpy as np

from .constraints import CompatibilityReport
from .lp import LpSolution, Status
from .martingale import ConvexOrderResult, PriceBounds, conditional_mean_residual
from .invariant import invariance_residual
from .monotonicity import MonotonicityVerdict
from .fileformat import BuiltProblem, FORMAT_VERSION
from .solver import DualCertificate, FeasibilityReport, InfeasibilityCertificate, SolveReport, separable_sum

COUPLING_CUTOFF = 1e-12


def coupling_entries(weights: np.ndarray) -> list:
    """Sparse ``[{index, weight}]`` list in flat-index order, weights above 1e-12."""
    flat = weights.reshape(-1)
    out = []
    for f in np.flatnonzero(flat > COUPLING_CUTOFF):
        idx = np.unravel_index(f, weights.shape)
        out.append({"index": [int(i) for i in idx], "weight": float(flat[f])})
    return out


def certificate_dict(cert, built: BuiltProblem) -> dict:
    ids = [s.id for s in built.problem.grid.factors]
    return {
        "potentials": {sid: [float(v) for v in f] for sid, f in zip(ids, cert.potentials)},
        "multipliers": {name: float(v) for name, v in zip(built.problem.constraints.names, cert.multipliers)},
    }


def monotonicity_dict(v: MonotonicityVerdict) -> dict:
    d = {
        "passed": bool(v.passed),
        "worst_violation": float(v.worst_violation),
        "subsets_checked": v.subsets_checked,
        "measures_checked": v.measures_checked,
        "exhaustive": bool(v.exhaustive),
        "tol": float(v.tol),
        "resolution": "grid",
    }
    if v.witness is not None:
        d["witness"] = coupling_entries(v.witness.weights)
        d["worst_support"] = {
            "points": [list(p) for p in v.worst_support.points],
            "weights": [float(w) for w in v.worst_support.weights],
        }
    return d


def convex_order_dict(cx: ConvexOrderResult | None):
    if cx is None:
        return None
    return {
        "ordered": bool(cx.ordered),
        "mean_gap": float(cx.mean_gap),
        "call_gap": float(cx.call_gap),
        "witness_strike": cx.witness_strike,
    }


def _diagnostics(built: BuiltProblem, report: SolveReport) -> dict:
    d = {"feasible": report.status is not Status.INFEASIBLE}
    if report.optimal:
        if built.constraint_type == "martingale":
            d["conditional_mean_residual"] = conditional_mean_residual(report.coupling)
        if built.group is not None:
            d["invariance_residual"] = invariance_residual(report.coupling, built.group)
    return d


def solve_report(built: BuiltProblem, report: SolveReport, monotonicity: MonotonicityVerdict | None = None) -> dict:
    out = {"version": FORMAT_VERSION, "command": "solve", "status": str(report.status)}
    if report.optimal:
        out.update(
            primal_value=float(report.primal_value),
            dual_value=float(report.dual_value),
            gap=float(report.gap),
            coupling=coupling_entries(report.coupling.weights),
            certificate=certificate_dict(report.certificate, built),
        )
    elif report.infeasibility is not None:
        out["infeasibility_certificate"] = certificate_dict(report.infeasibility, built)
    diag = _diagnostics(built, report)
    if monotonicity is not None:
        diag["monotonicity"] = monotonicity_dict(monotonicity)
    out["diagnostics"] = diag
    return out


def lp_report(sol: LpSolution) -> dict:
    out = {"version": FORMAT_VERSION, "command": "solve", "status": str(sol.status)}
    if sol.optimal:
        out.update(objective_value=float(sol.objective_value),
                   primal=[float(v) for v in sol.primal], dual=[float(v) for v in sol.dual])
    elif sol.status is Status.INFEASIBLE:
        out["certificate"] = [float(v) for v in sol.certificate]
    else:
        out["ray"] = [float(v) for v in sol.ray]
    return out


def feasibility_report(built: BuiltProblem, res: FeasibilityReport) -> dict:
    out = {"version": FORMAT_VERSION, "command": "check", "check": "feasible", "passed": bool(res.feasible)}
    if res.feasible:
        out["witness"] = coupling_entries(res.witness.weights)
    else:
        out["infeasibility_certificate"] = certificate_dict(res.certificate, built)
    return out


def compatibility_report(rep: CompatibilityReport) -> dict:
    entries = []
    for e in rep.entries:
        entry = {"generator": e.generator, "applicable": e.applicable, "violated": bool(e.violated)}
        if e.applicable:
            entry.update(factor=e.factor, integral=float(e.integral))
        entries.append(entry)
    return {"version": FORMAT_VERSION, "command": "check", "check": "marginal_compat",
            "passed": bool(rep.compatible), "generators": entries}


def monotone_check_report(built: BuiltProblem, report: SolveReport, v: MonotonicityVerdict | None) -> dict:
    out = {"version": FORMAT_VERSION, "command": "check", "check": "monotone", "status": str(report.status)}
    if v is None:
        out["passed"] = False
        return out
    out["passed"] = bool(v.passed)
    out["monotonicity"] = monotonicity_dict(v)
    out["primal_value"] = float(report.primal_value)
    return out


def bounds_report(built: BuiltProblem, b: PriceBounds) -> dict:
    return {
        "version": FORMAT_VERSION,
        "command": "bounds",
        "status": "optimal",
        "lower": float(b.lower),
        "upper": float(b.upper),
        "lower_certificate": certificate_dict(b.subhedge, built),
        "upper_certificate": certificate_dict(b.superhedge, built),
        "lower_coupling": coupling_entries(b.lower_report.coupling.weights),
        "upper_coupling": coupling_entries(b.upper_report.coupling.weights),
        "convex_order": convex_order_dict(b.convex_order),
        "diagnostics": {
            "conditional_mean_residual": max(conditional_mean_residual(b.lower_report.coupling),
                                             conditional_mean_residual(b.upper_report.coupling)),
        },
    }


def infeasible_bounds_report(built: BuiltProblem, report: SolveReport, cx) -> dict:
    out = {"version": FORMAT_VERSION, "command": "bounds", "status": "infeasible",
           "convex_order": convex_order_dict(cx)}
    if report.infeasibility is not None:
        out["infeasibility_certificate"] = certificate_dict(report.infeasibility, built)
    return out


def validate_solve_report(built: BuiltProblem, report: dict, row_tol: float = 1e-8,
                          dual_tol: float = 1e-7) -> list:
    """Re-check a serialized solve report against its problem.

    Uses only the JSON content of the report plus the problem data: the
    coupling must satisfy every marginal and constraint row, the certificate
    must be dual feasible, and the stated values must agree with both.
    Returns a list of failure messages (empty when the report is valid).
    """
    p = built.problem
    grid = p.grid
    problems = []
    status = report.get("status")
    if status == "infeasible":
        cert = report.get("infeasibility_certificate")
        if cert is None:
            return ["infeasible report without certificate"]
        pots = [np.array(cert["potentials"][s.id]) for s in grid.factors]
        lam = np.array([cert["multipliers"][n] for n in p.constraints.names])
        env = InfeasibilityCertificate(tuple(pots), lam)
        lower = DualCertificate(tuple(pots), lam).lower_envelope(grid, p.constraints)
        if lower.max() > 1e-9:
            problems.append(f"Farkas envelope positive ({lower.max():.3e})")
        if env.value(p.marginals) <= 1e-9:
            problems.append("Farkas value not positive")
        return problems
    if status != "optimal":
        return [f"unexpected status {status!r}"]

    w = np.zeros(grid.shape)
    for entry in report["coupling"]:
        w[tuple(entry["index"])] = entry["weight"]
    for k, mu in enumerate(p.marginals):
        axes = tuple(a for a in range(grid.ndim) if a != k)
        err = np.abs(w.sum(axis=axes) - mu.weights).max()
        if err > row_tol:
            problems.append(f"marginal {k} off by {err:.3e}")
    for g in p.constraints:
        err = abs(float((g.values * w).sum()))
        if err > row_tol:
            problems.append(f"constraint {g.name} off by {err:.3e}")
    primal = float((p.cost.values * w).sum())
    if abs(primal - report["primal_value"]) > row_tol * (1 + abs(primal)):
        problems.append("primal_value does not match coupling")

    cert = report["certificate"]
    pots = [np.array(cert["potentials"][s.id]) for s in grid.factors]
    lam = np.array([cert["multipliers"][n] for n in p.constraints.names])
    envelope = separable_sum(grid, pots)
    for v, g in zip(lam, p.constraints):
        envelope = envelope + v * g.values
    viol = float((envelope - p.cost.values).max())
    if viol > dual_tol:
        problems.append(f"certificate infeasible by {viol:.3e}")
    dual = float(sum(f @ mu.weights for f, mu in zip(pots, p.marginals)))
    if abs(dual - report["dual_value"]) > row_tol * (1 + abs(dual)):
        problems.append("dual_value does not match certificate")
    if abs(primal - dual) > dual_tol * (1 + abs(primal)):
        problems.append(f"duality gap {abs(primal - dual):.3e}")
    return problems
