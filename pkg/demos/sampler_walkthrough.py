"""
Learning one country's trait network
====================================

Draw ordinal answers from a known sparse Gaussian copula, run the birth-death
sampler and compare what it finds with the truth.
"""

import numpy as np

from culturenet.inference import McmcConfig, partial_correlations, run_bdmcmc
from culturenet.ingest import ResponseMatrix
from culturenet.netstats import STATS_FIELDS, network_stats, signed_graph
from culturenet.synthetic import discretize, latent_sample, sparse_precision

# %%
# Six traits, three of them linked.  Off-diagonal precision -0.4 means a
# partial correlation of +0.4 on each true edge.
edges = [(0, 1), (1, 2), (3, 5)]
k = sparse_precision(6, edges, -0.4)
print(np.round(partial_correlations(k), 2))

# %%
# Respondents only report a 1..4 answer: the latent scores are cut at their
# quartiles, so the sampler never sees the Gaussian values.
rng = np.random.default_rng(12)
y = discretize(latent_sample(k, 800, rng), 4)
print(y[:5])

# %%
# A short chain is enough at this sample size.
summary = run_bdmcmc(ResponseMatrix.from_array(y),
                     McmcConfig(iterations=3000, burnin=1000, seed=3))
np.set_printoptions(precision=2, suppress=True)
print("posterior edge probabilities\n", summary.edge_probs)
print("selected edges:", summary.binary.edges)
print("sampler bookkeeping:", {key: summary.diagnostics[key] for key in ("births", "deaths")})

# %%
# Signs come from the model-averaged partial correlations.
stats = network_stats(signed_graph(summary.binary, summary.parcorr))
for name, value in zip(STATS_FIELDS, stats.row()):
    print(f"{name:>14}: {value:.3f}")
