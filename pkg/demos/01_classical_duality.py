# %% [markdown]
# Classical transport and its dual
#
# With no extra constraints the solver is an exact earth mover's distance
# solver. Every optimal solve comes back with potentials f, g such that
# f(x) + g(y) <= c(x, y) everywhere, and sum f mu + sum g nu equals the
# optimal cost.

# %%
import numpy as np

from constrained_ot import ConstrainedProblem, CostTensor, DiscreteMeasure, DiscreteSpace, ProductGrid, solve_primal

xs = np.array([0.0, 1.0, 2.0, 4.0])
ys = np.array([0.5, 1.5, 3.0])
X = DiscreteSpace.from_coordinates("X", xs)
Y = DiscreteSpace.from_coordinates("Y", ys)
grid = ProductGrid([X, Y])

mu = DiscreteMeasure(X, [0.1, 0.4, 0.3, 0.2])
nu = DiscreteMeasure(Y, [0.5, 0.25, 0.25])
cost = CostTensor.from_function(grid, lambda x, y: (x - y) ** 2)

report = solve_primal(ConstrainedProblem([mu, nu], cost), normalize=True)
print("status      ", report.status)
print("primal value", report.primal_value)
print("dual value  ", report.dual_value)
print("coupling\n", np.round(report.coupling.weights, 4))

# %% [markdown]
# The certificate is checked cell by cell: slack is c - f - g, nonnegative
# everywhere and zero wherever the coupling puts mass.

# %%
slack = report.certificate.slack(ConstrainedProblem([mu, nu], cost))
print("min slack         ", slack.min())
print("max slack on plan ", slack[report.coupling.weights > 1e-9].max())
