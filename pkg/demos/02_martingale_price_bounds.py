# %% [markdown]
# Model-free price bounds
#
# Today's price distribution mu and tomorrow's nu are known (say, implied
# from vanilla options). Any martingale coupling of them is a consistent
# model. The cheapest and dearest expected payoff over all such couplings
# bracket the price of an exotic, and the dual certificates are static
# hedges: cash positions in each marginal plus a dynamic stock position.

# %%
import numpy as np

from constrained_ot import (
    CostTensor,
    DiscreteMeasure,
    DiscreteSpace,
    MartingaleProblem,
    ProductGrid,
    conditional_mean_residual,
    convex_order_check,
    price_bounds,
)

X = DiscreteSpace.from_coordinates("today", [90.0, 100.0, 110.0])
Y = DiscreteSpace.from_coordinates("tomorrow", [80.0, 95.0, 100.0, 105.0, 120.0])
mu = DiscreteMeasure(X, [0.25, 0.5, 0.25])
nu = DiscreteMeasure(Y, [0.15, 0.2, 0.3, 0.2, 0.15])
print("mean today", mu.mean(), "mean tomorrow", nu.mean())
print("convex order:", convex_order_check(mu, nu))

# %% [markdown]
# A forward-start straddle pays |Y - X|.

# %%
grid = ProductGrid([X, Y])
payoff = CostTensor.from_function(grid, lambda x, y: np.abs(y - x))
bounds = price_bounds(MartingaleProblem([mu, nu], payoff))
print(f"price interval [{bounds.lower:.4f}, {bounds.upper:.4f}]")
print("martingale residual of the cheapest model", conditional_mean_residual(bounds.lower_report.coupling))

# %% [markdown]
# The super-hedge dominates the payoff in every state, and costs exactly the
# upper bound.

# %%
problem = MartingaleProblem([mu, nu], payoff).constrained()
hedge = bounds.superhedge.lower_envelope(problem.grid, problem.constraints)
print("min hedge - payoff:", (hedge - payoff.values).min())
print("hedge cost        :", bounds.superhedge.value([mu, nu]))

# %% [markdown]
# If tomorrow's distribution is less spread than today's, no martingale
# coupling exists and the bounds call reports why.

# %%
from constrained_ot import MartingaleInfeasibleError

narrow = DiscreteMeasure(DiscreteSpace.from_coordinates("tomorrow", [100.0]), [1.0])
try:
    price_bounds(MartingaleProblem([mu, narrow], CostTensor(ProductGrid([X, narrow.space]), np.zeros((3, 1)))))
except MartingaleInfeasibleError as exc:
    print(exc)
