"""
Transport problems with extra linear constraints, their LP form and duals.

The primal is

    min  sum_x c(x) pi(x)
    s.t. pi >= 0,  marginal_k(pi) = mu_k  (k = 1..n),
         sum_x omega_j(x) pi(x) = 0        (j = 1..J).

Its LP dual splits into one potential ``f_k`` per factor and one signed
multiplier ``lambda_j`` per generator, feasible when

    f_1(x_1) + ... + f_n(x_n) + sum_j lambda_j omega_j(x) <= c(x)

at every cell, with value ``sum_k <f_k, mu_k>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constraints import ConstraintSet, assemble_rows
from .lp import LinearProgram, LPBreakdownError, Status, phase1_feasibility, solve_lp
from .measures import CostTensor, Coupling, DiscreteMeasure, ProductGrid

DUAL_TOL = 1e-7
ROW_TOL = 1e-8


@dataclass(frozen=True)
class ConstrainedProblem:
    """Marginals, a cost tensor and a constraint family on a common grid."""

    marginals: tuple
    cost: CostTensor
    constraints: ConstraintSet

    def __init__(self, marginals: Sequence[DiscreteMeasure], cost: CostTensor,
                 constraints: ConstraintSet | None = None):
        marginals = tuple(marginals)
        grid = cost.grid
        if len(marginals) != grid.ndim:
            raise ValueError(f"{len(marginals)} marginals for {grid.ndim} factors")
        for k, (m, space) in enumerate(zip(marginals, grid.factors)):
            if m.space != space:
                raise ValueError(f"marginal {k} lives on {m.space.id!r}, grid factor is {space.id!r}")
        if constraints is None:
            constraints = ConstraintSet.empty(grid)
        elif constraints.grid != grid:
            raise ValueError("constraints and cost live on different grids")
        object.__setattr__(self, "marginals", marginals)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "constraints", constraints)

    @property
    def grid(self) -> ProductGrid:
        return self.cost.grid

    def with_cost(self, cost: CostTensor) -> "ConstrainedProblem":
        return ConstrainedProblem(self.marginals, cost, self.constraints)

    def with_constraints(self, constraints: ConstraintSet | None) -> "ConstrainedProblem":
        return ConstrainedProblem(self.marginals, self.cost, constraints)


def marginal_rows(shape) -> np.ndarray:
    """0/1 matrix whose row ``(k, i)`` sums the cells with ``x_k = i``."""
    idx = np.indices(shape)
    blocks = []
    for k, size in enumerate(shape):
        flat = idx[k].reshape(-1)
        blocks.append((flat[None, :] == np.arange(size)[:, None]).astype(float))
    return np.vstack(blocks)


def assemble_lp(p: ConstrainedProblem) -> LinearProgram:
    A = np.vstack([marginal_rows(p.grid.shape), assemble_rows(p.constraints)])
    b = np.concatenate([m.weights for m in p.marginals] + [np.zeros(len(p.constraints))])
    return LinearProgram(p.cost.values.reshape(-1), A, b)


def _split_dual(grid: ProductGrid, y: np.ndarray):
    sizes = list(grid.shape)
    cuts = np.cumsum(sizes)
    potentials = tuple(np.array(v) for v in np.split(y[:cuts[-1]], cuts[:-1]))
    return potentials, np.array(y[cuts[-1]:])


def separable_sum(grid: ProductGrid, potentials: Sequence[np.ndarray]) -> np.ndarray:
    """The tensor ``f_1(x_1) + ... + f_n(x_n)``."""
    out = np.zeros(grid.shape)
    for k, f in enumerate(potentials):
        view = [1] * grid.ndim
        view[k] = grid.shape[k]
        out = out + np.asarray(f, float).reshape(view)
    return out


@dataclass(frozen=True)
class DualCertificate:
    """Potentials per factor and multipliers per generator."""

    potentials: tuple
    multipliers: np.ndarray
    names: tuple = ()

    def value(self, marginals: Sequence[DiscreteMeasure]) -> float:
        return float(sum(f @ m.weights for f, m in zip(self.potentials, marginals)))

    def lower_envelope(self, grid: ProductGrid, constraints: ConstraintSet) -> np.ndarray:
        """``f_1 + ... + f_n + sum_j lambda_j omega_j`` as a grid tensor."""
        out = separable_sum(grid, self.potentials)
        for lam, g in zip(self.multipliers, constraints.generators):
            out = out + lam * g.values
        return out

    def slack(self, p: ConstrainedProblem) -> np.ndarray:
        """``c - (f + lambda . omega)``; nonnegative everywhere when feasible."""
        return p.cost.values - self.lower_envelope(p.grid, p.constraints)

    def max_violation(self, p: ConstrainedProblem) -> float:
        return float(max(0.0, -self.slack(p).min()))

    def is_feasible(self, p: ConstrainedProblem, tol: float = DUAL_TOL) -> bool:
        return self.max_violation(p) <= tol

    def normalized(self) -> "DualCertificate":
        """Shift so that ``f_k(first point) = 0`` for ``k >= 2``.

        The shifts are absorbed by ``f_1``; because every marginal has unit
        mass, the envelope and the dual value are unchanged.
        """
        pots = [np.array(f, float) for f in self.potentials]
        for k in range(1, len(pots)):
            shift = pots[k][0]
            pots[k] = pots[k] - shift
            pots[0] = pots[0] + shift
        return DualCertificate(tuple(pots), self.multipliers, self.names)


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Farkas witness: ``f + lambda . omega <= 0`` everywhere yet ``sum <f_k, mu_k> > 0``."""

    potentials: tuple
    multipliers: np.ndarray
    names: tuple = ()

    def value(self, marginals) -> float:
        return float(sum(f @ m.weights for f, m in zip(self.potentials, marginals)))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    witness: Coupling | None = None
    certificate: InfeasibilityCertificate | None = None


@dataclass(frozen=True)
class SolveReport:
    status: Status
    primal_value: float | None = None
    dual_value: float | None = None
    coupling: Coupling | None = None
    certificate: DualCertificate | None = None
    infeasibility: InfeasibilityCertificate | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    @property
    def gap(self) -> float | None:
        if not self.optimal:
            return None
        return abs(self.primal_value - self.dual_value)


def _coupling_from(grid, x) -> Coupling:
    w = np.maximum(np.asarray(x, float), 0.0)
    return Coupling(grid, w.reshape(grid.shape))


def _infeasibility(p, y) -> InfeasibilityCertificate:
    pots, lam = _split_dual(p.grid, y)
    return InfeasibilityCertificate(pots, lam, tuple(p.constraints.names))


def check_feasible(p: ConstrainedProblem) -> FeasibilityReport:
    """Decide whether any coupling satisfies the marginals and the constraints."""
    lp = assemble_lp(p)
    res = phase1_feasibility(lp.A, lp.b)
    if not res.feasible:
        return FeasibilityReport(False, certificate=_infeasibility(p, res.certificate))
    return FeasibilityReport(True, witness=_coupling_from(p.grid, res.witness))


def solve_primal(p: ConstrainedProblem, normalize: bool = False) -> SolveReport:
    """Optimal coupling and a matching dual certificate.

    Infeasible problems are returned with status ``infeasible`` and a Farkas
    certificate rather than raising. All optimal outputs are checked: the
    coupling against every row, the certificate for feasibility, and the
    duality gap.
    """
    lp = assemble_lp(p)
    sol = solve_lp(lp)
    if sol.status is Status.INFEASIBLE:
        return SolveReport(Status.INFEASIBLE, infeasibility=_infeasibility(p, sol.certificate))
    if sol.status is Status.UNBOUNDED:
        # cannot happen with probability marginals; kept for completeness
        return SolveReport(Status.UNBOUNDED)
    coupling = _coupling_from(p.grid, sol.primal)
    pots, lam = _split_dual(p.grid, sol.dual)
    cert = DualCertificate(pots, lam, tuple(p.constraints.names))
    if normalize:
        cert = cert.normalized()
    report = SolveReport(Status.OPTIMAL, sol.objective_value, cert.value(p.marginals), coupling, cert)
    _verify(p, lp, report)
    return report


def _verify(p, lp, report):
    x = report.coupling.weights.reshape(-1)
    residual = np.abs(lp.A @ x - lp.b).max()
    if residual > ROW_TOL:
        raise LPBreakdownError(f"coupling violates a constraint row by {residual:.3e}")
    viol = report.certificate.max_violation(p)
    if viol > DUAL_TOL:
        raise LPBreakdownError(f"dual certificate infeasible by {viol:.3e}")
    if report.gap > DUAL_TOL * (1 + abs(report.primal_value)):
        raise LPBreakdownError(f"duality gap {report.gap:.3e}")


def solve_dual(p: ConstrainedProblem, normalize: bool = False) -> DualCertificate:
    """Dual certificate of an optimal solve; raises if the primal is not optimal."""
    report = solve_primal(p, normalize=normalize)
    if not report.optimal:
        raise ValueError(f"no dual certificate: primal is {report.status}")
    return report.certificate


def duality_gap(report: SolveReport) -> float:
    """``|primal - dual|`` of an optimal report."""
    if not report.optimal:
        raise ValueError(f"duality gap undefined for status {report.status}")
    return report.gap
