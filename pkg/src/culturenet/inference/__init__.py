"""Per-country Bayesian Gaussian copula graphical models."""

from .bdmcmc import (
    McmcConfig,
    PosteriorSummary,
    birth_death_rates,
    country_seed,
    edge_inclusion,
    log_rate_ratios,
    partial_correlations,
    run_bdmcmc,
    select_binary_graph,
)
from .graph import Graph
from .gwishart import GWishartParams, sample_gwishart, sample_wishart
from .latent import gibbs_latent_sweep, init_latent, is_rank_consistent, rank_bounds

__all__ = [
    "GWishartParams",
    "Graph",
    "McmcConfig",
    "PosteriorSummary",
    "birth_death_rates",
    "country_seed",
    "edge_inclusion",
    "gibbs_latent_sweep",
    "init_latent",
    "is_rank_consistent",
    "log_rate_ratios",
    "partial_correlations",
    "rank_bounds",
    "run_bdmcmc",
    "sample_gwishart",
    "sample_wishart",
    "select_binary_graph",
]
