"""
A reduced privacy experiment
============================

The full design crosses model families, privacy budgets, truncation degrees,
releases, networks and simulations. Here a small version runs in about a
minute: both model families, two budgets, one truncation degree, a 300-node
ground truth and shortened simulations.
"""

import math
import tempfile
from pathlib import Path

import numpy as np

import dpnetepi as dp
from dpnetepi.anova import variance_decomposition
from dpnetepi.experiment import desk_observed

plan = dp.ExperimentPlan(
    epsilons=(5.0, math.inf),
    delta_caps=(3,),
    releases=3,
    networks=3,
    sims=4,
    settings=(("high", dp.SimConfig(p_inf=0.75, burn_in=200, analytic_window=50)),),
    observed=desk_observed(300),
    master_seed=7,
)
print("expected rows:", dp.expected_row_count(plan))
res = dp.run_experiment(plan)
print(f"{len(res)} rows from {res.simulations} simulations, {res.conservation_violations} conservation violations")

# %%
# Prevalence ratio by cell
# ------------------------
cells = {}
for r in res.rows:
    if r.metric == "prevalence_ratio" and r.group == "ALL" and not math.isnan(r.value):
        cells.setdefault((r.model, r.condition, r.epsilon), []).append(r.value)
for (model, cond, eps), v in cells.items():
    label = "" if eps is None else f" epsilon={eps}"
    print(f"{model:8s} {cond:8s}{label:15s} mean ratio {np.mean(v):.3f} over {len(v)} pairs")

# %%
# Where the variance comes from
# -----------------------------
# Within one DP cell, baseline prevalence varies between releases, between
# networks of a release and between simulations on a network.
rows = [r for r in res.rows if r.model == "ergm" and r.condition == dp.DP and r.epsilon == 5.0
        and r.scenario == "high/baseline" and r.metric == "prevalence" and r.group == "ALL"]
table = variance_decomposition(rows, plan.releases, plan.networks, plan.sims)
for row in table.rows:
    print(f"{row.source:32s} df {row.df:3d}  SS {row.ss:.5f}  {row.var_pct:5.1f}%")

# %%
# Files
# -----
# The results CSV is the single source for plots; ``export_plot_data``
# writes tidy summary tables.
out = Path(tempfile.mkdtemp())
dp.export_results(res.rows, out / "results.csv")
for kind in ("prevalence_ratio", "quality"):
    dp.export_plot_data(res.rows, kind, out / f"{kind}.csv")
print((out / "quality.csv").read_text().splitlines()[:4])
