"""Price-zone delineation for electricity networks."""

import json

from ._core import (
    ConfigError,
    InfeasibleError,
    Network,
    ParseError,
    ValidationError,
    capacity_factor,
    generalized_ptdf,
    incidence_matrix,
    load_case,
    parse_case,
    ptdf_matrix,
    scenarios_csv,
    ward_cluster,
)
from . import _core

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "Network",
    "ParseError",
    "ValidationError",
    "capacity_factor",
    "compare",
    "dc_opf",
    "generalized_ptdf",
    "incidence_matrix",
    "load_case",
    "parse_case",
    "ptdf_matrix",
    "scenarios_csv",
    "ward_cluster",
]


def dc_opf(network, enforce_limits=True):
    """Dispatch, flows and nodal prices as a dict."""
    return json.loads(_core.dc_opf_json(network, enforce_limits))


def compare(network, count=100, seed=1, max_k=6, threads=1):
    """Run both zoning methods and return the comparison record as a dict."""
    return json.loads(_core.compare_json(network, count, seed, max_k, threads))
