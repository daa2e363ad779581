from .placement import (
    rp_distribution,
    rp_place,
    rrp_distribution,
    rrp_place,
    vrrp_distribution,
    vrrp_place,
    vrrp_split,
)
from .tree_dp import DpTable, tree_dp_solve
from .uckm import UckmSolution, transport_for, uckm_solve

__all__ = [
    "DpTable",
    "UckmSolution",
    "rp_distribution",
    "rp_place",
    "rrp_distribution",
    "rrp_place",
    "transport_for",
    "tree_dp_solve",
    "uckm_solve",
    "vrrp_distribution",
    "vrrp_place",
    "vrrp_split",
]
