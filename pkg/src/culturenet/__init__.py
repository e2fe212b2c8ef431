"""Cultural networks: copula graphical models per country, network distances, maps."""

from . import distances, ingest, inference, netstats, projection
from .distances import DistanceMatrix, network_index, standardize
from .inference import McmcConfig, PosteriorSummary, run_bdmcmc
from .ingest import WVS6_CATALOG, SurveyDataset, parse_survey
from .netstats import SignedGraph, network_stats, signed_graph
from .projection import classical_mds, kernel_density, pca

__version__ = "0.1.0"

__all__ = [
    "DistanceMatrix",
    "McmcConfig",
    "PosteriorSummary",
    "SignedGraph",
    "SurveyDataset",
    "WVS6_CATALOG",
    "classical_mds",
    "distances",
    "ingest",
    "inference",
    "kernel_density",
    "netstats",
    "network_index",
    "network_stats",
    "parse_survey",
    "pca",
    "projection",
    "run_bdmcmc",
    "signed_graph",
    "standardize",
]
