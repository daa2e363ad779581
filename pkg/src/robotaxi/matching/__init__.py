from ..core.metric import point_mass
from .distances import (
    MatchingPlan,
    TransportPlan,
    brute_force_matching,
    matching_cost,
    matching_value,
    nearest_allowable,
    project_to_allowable,
    wasserstein,
)
from .flow import TransportResult, min_cost_transport

__all__ = [
    "MatchingPlan",
    "TransportPlan",
    "TransportResult",
    "brute_force_matching",
    "matching_cost",
    "matching_value",
    "min_cost_transport",
    "nearest_allowable",
    "point_mass",
    "project_to_allowable",
    "wasserstein",
]
