from ._backend import active_backend_name, available_backends, get_backend
from .api import (
    DEFAULT_ARC_BUDGET,
    MatchResult,
    TransportPlan,
    WeightedCloud,
    assignment_cost,
    brute_force_cost,
    monotone_1d_cost,
    ot_cost,
    semidiscrete_bias_bound,
    semidiscrete_estimate,
    wb2_cost,
)

__all__ = [
    "DEFAULT_ARC_BUDGET",
    "MatchResult",
    "TransportPlan",
    "WeightedCloud",
    "active_backend_name",
    "assignment_cost",
    "available_backends",
    "brute_force_cost",
    "get_backend",
    "monotone_1d_cost",
    "ot_cost",
    "semidiscrete_bias_bound",
    "semidiscrete_estimate",
    "wb2_cost",
]
