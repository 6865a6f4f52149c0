"""
Discrete optimal transport with additional linear constraints.

Couplings of finitely supported marginals are optimized subject to
``sum_x omega(x) pi(x) = 0`` for a finite family of generators ``omega``.
The package solves the primal, returns dual certificates (potentials plus
signed generator multipliers), checks cost-monotonicity of optimal supports,
and ships two constraint families: martingale couplings and couplings
invariant under a finite group.
"""

from .constraints import (
    ConstraintGenerator,
    ConstraintSet,
    assemble_rows,
    check_marginal_compatibility,
    reduce_generators,
)
from .invariant import (
    GroupAction,
    GroupAxiomError,
    group_from_generators,
    invariance_generators,
    invariance_residual,
    invariant_problem,
    invariant_reduction_check,
    projection_W1,
    symmetrize_function,
    symmetrize_measure,
    validate_group,
)
from .lp import LinearProgram, LPBreakdownError, LpSolution, Status, phase1_feasibility, solve_lp
from .martingale import (
    MartingaleInfeasibleError,
    MartingaleProblem,
    conditional_mean_residual,
    convex_order_check,
    martingale_generators,
    price_bounds,
)
from .measures import (
    CostTensor,
    Coupling,
    DiscreteMeasure,
    DiscreteSpace,
    ProductGrid,
    integrate,
    marginal,
    product_measure,
    pushforward,
)
from .monotonicity import (
    MonotonicityVerdict,
    SupportSet,
    check_cW_monotone,
    equivalence_minimize,
    verify_solution_monotone,
)
from .solver import (
    ConstrainedProblem,
    DualCertificate,
    SolveReport,
    check_feasible,
    duality_gap,
    solve_dual,
    solve_primal,
)

__version__ = "0.1.0"
