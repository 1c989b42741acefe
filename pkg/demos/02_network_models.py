"""
Network models from exact and private statistics
================================================

We draw a 1,000-node ground-truth network, then fit a stochastic block
model (age mixing only) and an ERGM (degrees, age and race terms) to its
statistics, with and without privacy noise, and compare synthetic networks
with the original.
"""

import numpy as np

import dpnetepi as dp
from dpnetepi.experiment import desk_observed

rng = np.random.default_rng(42)
observed = dp.generate_observed_network(desk_observed(1000), rng)
nodes = observed.with_edges([])
print(f"observed: {observed.edge_count} edges, degree histogram {dp.degree_histogram(observed).tolist()}")

# %%
# Stochastic block model
# ----------------------
# Edge probability per pair of age groups is the mixing-matrix count divided
# by the number of vertex pairs between the groups.
sbm = dp.fit_sbm(dp.mixing_matrix(observed, "age"), observed.schema("age"))
print("SBM edge probabilities x 1000:\n", np.round(1000 * sbm.edge_prob, 2))
sbm_net = dp.sample_sbm(sbm, nodes, rng)
print("SBM sample quality (% difference):", {k: round(float(v), 1) for k, v in dp.quality_metrics(sbm_net, observed, ["age", "race"]).items()})

# %%
# The SBM reproduces the age mixing by construction but knows nothing about
# degrees, so nodes with four or more partners appear.
print("SBM degree histogram:", dp.degree_histogram(sbm_net).tolist())

# %%
# ERGM fitted to exact statistics
# -------------------------------
# The standard specification has edges, degree thresholds 2 and 4, age
# nodematch per group, race total nodematch and age/race nodefactor terms.
spec = dp.ErgmSpec.standard(observed.categories)
targets = dp.ergm_statistics(observed, spec)
fit = dp.fit_ergm(targets, spec, nodes, rng=rng)
print("converged:", fit.converged, "| terms held at the cap:", fit.at_cap)
for term, theta, t in zip(spec.descriptors(), fit.theta, fit.t_ratios):
    print(f"  {term:24s} theta {theta:+7.3f}   t {t:+5.2f}")
ergm_net = dp.sample_ergm(fit.params, spec, nodes, rng=rng)
print("ERGM sample quality (% difference):", {k: round(float(v), 1) for k, v in dp.quality_metrics(ergm_net, observed, ["age", "race"]).items()})

# %%
# ERGM fitted to a private release
# --------------------------------
# Noisy targets can be infeasible (negative, or more age-matched edges than
# edges in total). They are clamped into range before fitting.
for eps in (1.0, 10.0):
    rel = dp.release_statistics(observed, dp.ReleaseSpec(spec.terms, eps, 3), rng)
    noisy = dp.fit_ergm(rel.values, spec, nodes, rng=rng)
    net = dp.sample_ergm(noisy.params, spec, nodes, rng=rng)
    q = dp.quality_metrics(net, observed, ["age", "race"])
    print(f"epsilon={eps:>4}: {len(noisy.clamped)} clamped targets, converged {noisy.converged}, "
          f"edges {q['edges']:+.1f}%, concurrent {q['concurrent']:+.1f}%")
