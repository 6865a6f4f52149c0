# %% [markdown]
# Symmetric couplings
#
# Require the coupling to be invariant under a finite group acting on both
# coordinates at once. When the marginals are themselves invariant, the
# constrained problem with cost c has the same value as the plain problem
# with the group-averaged cost c-bar; for an invariant cost the constraint
# costs nothing at all.

# %%
import numpy as np

from constrained_ot import (
    ConstrainedProblem,
    CostTensor,
    DiscreteMeasure,
    DiscreteSpace,
    ProductGrid,
    group_from_generators,
    invariance_residual,
    invariant_problem,
    invariant_reduction_check,
    solve_primal,
    symmetrize_function,
)

n = 6
space = DiscreteSpace("clock", [f"{h}h" for h in range(0, 12, 2)])
grid = ProductGrid([space, DiscreteSpace("clock2", space.labels)])
rotate = np.roll(np.arange(n), -1)
group = group_from_generators([[rotate, rotate]])
print("group order", group.order)

uniform = [DiscreteMeasure.uniform(f) for f in grid.factors]
rng = np.random.default_rng(0)
cost = CostTensor(grid, rng.random((n, n)))

p = invariant_problem(uniform, cost, group)
print("independent constraints after reduction:", len(p.constraints))

# %%
check = invariant_reduction_check(p, group)
print("constrained value with c      ", check.constrained.primal_value)
print("unconstrained value with c-bar", check.symmetrized.primal_value)
print("invariance residual of the plan", invariance_residual(check.constrained.coupling, group))

# %% [markdown]
# With an invariant cost, adding the constraint changes nothing.

# %%
cbar = symmetrize_function(cost, group)
print("invariant cost, constrained  ", solve_primal(invariant_problem(uniform, cbar, group)).primal_value)
print("invariant cost, unconstrained", solve_primal(ConstrainedProblem(uniform, cbar)).primal_value)
