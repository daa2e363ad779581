from .binomial import binom_abs_dev, binom_abs_dev_table, binom_pmf
from .exact import (
    all_placements,
    edge_discrepancy_cost,
    enumerate_multisets,
    exact_cost_enumeration,
    expected_cost,
    multiset_count,
    tree_exact_cost,
)
from .montecarlo import CostEstimate, mc_cost, realization, realization_costs, sample_counts

__all__ = [
    "CostEstimate",
    "all_placements",
    "binom_abs_dev",
    "binom_abs_dev_table",
    "binom_pmf",
    "edge_discrepancy_cost",
    "enumerate_multisets",
    "exact_cost_enumeration",
    "expected_cost",
    "mc_cost",
    "multiset_count",
    "realization",
    "realization_costs",
    "sample_counts",
    "tree_exact_cost",
]
