from .bundle import InstanceBundle, bundle_from_dict, load_bundle, save_bundle
from .metric import (
    DemandDistribution,
    MetricSpace,
    Placement,
    make_distribution,
    metric_violations,
    point_mass,
    validate_metric,
)
from .tree import TreeMetric, binarize_tree, subtree_masses

__all__ = [
    "DemandDistribution",
    "InstanceBundle",
    "MetricSpace",
    "Placement",
    "TreeMetric",
    "binarize_tree",
    "bundle_from_dict",
    "load_bundle",
    "make_distribution",
    "metric_violations",
    "point_mass",
    "save_bundle",
    "subtree_masses",
    "validate_metric",
]
