"""Placement of k unit-capacity vehicles against random demand in a finite metric space."""

from .core import (
    DemandDistribution,
    InstanceBundle,
    MetricSpace,
    Placement,
    TreeMetric,
    binarize_tree,
    load_bundle,
    save_bundle,
    validate_metric,
)

__version__ = "0.1.0"

__all__ = [
    "DemandDistribution",
    "InstanceBundle",
    "MetricSpace",
    "Placement",
    "TreeMetric",
    "binarize_tree",
    "load_bundle",
    "save_bundle",
    "validate_metric",
]
