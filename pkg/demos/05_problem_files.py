# %% [markdown]
# Problem files and the command line
#
# Problems can be written as JSON and handed to ``constrained-ot``. Reports
# are canonical JSON (sorted keys, 17 significant digits), so the same file
# and seed always give the same bytes.

# %%
import json
import tempfile
from pathlib import Path

from constrained_ot.cli import main

problem = {
    "version": 1,
    "spaces": [
        {"id": "S1", "coordinates": [-1, 1]},
        {"id": "S2", "coordinates": [-2, 2]},
    ],
    "marginals": {"S1": [0.5, 0.5], "S2": [0.5, 0.5]},
    "cost": {"formula": "abs_diff"},
    "constraints": {"type": "martingale"},
}

work = Path(tempfile.mkdtemp())
path = work / "martingale.json"
path.write_text(json.dumps(problem, indent=2))

# %%
code = main(["solve", str(path), "--out", str(work / "report.json")])
report = json.loads((work / "report.json").read_text())
print("exit code", code, "| primal", report["primal_value"], "| dual", report["dual_value"])
print("coupling", [(e["index"], e["weight"]) for e in report["coupling"]])

# %%
code = main(["bounds", str(path), "--out", str(work / "bounds.json")])
bounds = json.loads((work / "bounds.json").read_text())
print("exit code", code, "| bounds", bounds["lower"], bounds["upper"])

# %% [markdown]
# Exit codes: 0 optimal or check passed, 1 bad input, 2 infeasible or check
# failed, 3 unbounded (bare LP files only).

# %%
problem["marginals"]["S2"] = [1.0]
problem["spaces"][1]["coordinates"] = [0]
path.write_text(json.dumps(problem))
print("infeasible martingale exit code:", main(["solve", str(path), "--out", str(work / "r2.json")]))
path.write_text('{"version": 1, "spaces": [}')
print("malformed file exit code:", main(["solve", str(path)]))
