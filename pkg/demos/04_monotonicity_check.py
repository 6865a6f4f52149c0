# %% [markdown]
# Monotone supports
#
# The support of an optimal plan cannot be improved locally: for any few
# support points and any weights beta on them, no measure with the same
# marginals and the same constraint integrals is cheaper. The checker tests
# every subset up to m_max points.

# %%
import numpy as np

from constrained_ot import (
    ConstrainedProblem,
    CostTensor,
    Coupling,
    DiscreteMeasure,
    DiscreteSpace,
    ProductGrid,
    Status,
    check_cW_monotone,
    martingale_generators,
    solve_primal,
    verify_solution_monotone,
)
from constrained_ot.solver import SolveReport

coords = [-2.0, -1.0, 0.0, 1.0, 2.0]
X = DiscreteSpace.from_coordinates("X", [-1.0, 0.0, 1.0])
Y = DiscreteSpace.from_coordinates("Y", coords)
grid = ProductGrid([X, Y])
mu = DiscreteMeasure(X, [0.3, 0.4, 0.3])
nu = DiscreteMeasure(Y, [0.1, 0.25, 0.3, 0.25, 0.1])
cost = CostTensor.from_function(grid, lambda x, y: (x + 0.5) * y ** 2)
p = ConstrainedProblem([mu, nu], cost, martingale_generators(grid))

report = solve_primal(p)
verdict = verify_solution_monotone(report, p, m_max=3, trials=20)
print("optimal plan passes:", verdict.passed, "| subsets:", verdict.subsets_checked,
      "| weightings:", verdict.measures_checked, "| LP solves:", verdict.lp_solves)

# %% [markdown]
# Without constraints the test reduces to the two-point swap inequality.
# The diagonal is not monotone for c = x*y: moving mass to the
# anti-diagonal is cheaper.

# %%
g2 = ProductGrid([DiscreteSpace.from_coordinates("a", [0, 1]), DiscreteSpace.from_coordinates("b", [0, 1])])
xy = CostTensor.from_function(g2, lambda x, y: x * y)
bad = check_cW_monotone([(0, 0), (1, 1)], xy, m_max=2)
print("diagonal passes:", bad.passed, "| violation", bad.worst_violation)
print("cheaper equivalent measure:\n", bad.witness.weights)

# %% [markdown]
# A plan that is admissible but not optimal is caught by its support.

# %%
free = ConstrainedProblem([DiscreteMeasure.uniform(f) for f in g2.factors], CostTensor.from_function(
    g2, lambda x, y: (x - y) ** 2))
shuffled = Coupling(g2, [[0.1, 0.4], [0.4, 0.1]])
print("suboptimal plan passes:",
      verify_solution_monotone(SolveReport(Status.OPTIMAL, coupling=shuffled), free, m_max=2).passed)
