"""Exact evaluation of the expected matching cost.

General metrics are handled by enumerating every demand realization, which
is only feasible for tiny instances. On trees the expectation decomposes
over edges and costs O(n k).
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.special import comb, gammaln

from ..core.bundle import InstanceBundle
from ..core.metric import Placement
from ..core.tree import TreeMetric
from ..errors import DimensionMismatch, KMismatch, TooLarge
from ..matching.distances import matching_value
from .binomial import binom_abs_dev

ENUMERATION_LIMIT = 100_000


def multiset_count(n: int, k: int) -> int:
    return int(comb(n + k - 1, k, exact=True))


def enumerate_multisets(probs, k: int, limit: int = ENUMERATION_LIMIT) -> tuple[np.ndarray, np.ndarray]:
    """All k-multisets over the support of ``probs`` with their probabilities under k i.i.d. draws.

    Returns ``(counts, weights)`` where ``counts`` has one row per multiset
    over all ``n`` points. Multisets touching a zero-probability point are
    skipped since they have probability zero.
    """
    p = np.asarray(probs, dtype=float)
    support = np.flatnonzero(p > 0)
    total = multiset_count(support.size, k)
    if total > limit:
        raise TooLarge(f"{total} demand realizations exceed the enumeration limit {limit}")
    counts = np.zeros((total, p.size), dtype=np.int64)
    for row, combo in enumerate(itertools.combinations_with_replacement(support.tolist(), k)):
        for x in combo:
            counts[row, x] += 1
    sub = counts[:, support]
    logw = gammaln(k + 1) - gammaln(sub + 1).sum(axis=1) + sub @ np.log(p[support])
    return counts, np.exp(logw)


def all_placements(n: int, k: int, limit: int = ENUMERATION_LIMIT):
    """Every k-multiset over ``n`` points, as Placements."""
    total = multiset_count(n, k)
    if total > limit:
        raise TooLarge(f"{total} placements exceed the enumeration limit {limit}")
    for combo in itertools.combinations_with_replacement(range(n), k):
        yield Placement.from_points(combo, n)


def _check_k(s: Placement, k: int) -> None:
    if s.k != k:
        raise KMismatch(f"placement has {s.k} units, instance has k = {k}")


def exact_cost_enumeration(bundle: InstanceBundle, s: Placement, limit: int = ENUMERATION_LIMIT) -> float:
    """E[d_k(s, X)] summed over every demand realization X."""
    _check_k(s, bundle.k)
    if s.n != bundle.n:
        raise DimensionMismatch(f"placement over {s.n} points, instance has {bundle.n}")
    counts, weights = enumerate_multisets(bundle.probs, bundle.k, limit)
    return expected_cost(bundle.dist, s, counts, weights)


def expected_cost(dist: np.ndarray, s: Placement, counts: np.ndarray, weights: np.ndarray) -> float:
    """Weighted matching cost of ``s`` against pre-enumerated realizations."""
    u = s.as_array()
    return math.fsum(w * matching_value(dist, u, x) for x, w in zip(counts, weights))


def _tree_counts(tree: TreeMetric, s: Placement, k: int | None) -> np.ndarray:
    if k is not None:
        _check_k(s, k)
    return tree.subtree_counts(tree.lift(s))


def tree_exact_cost(tree: TreeMetric, s: Placement, k: int | None = None) -> float:
    """Exact expected cost on a tree: sum over edges of B(|s in T_e|, p_e) c(e)."""
    k = s.k if k is None else k
    below = _tree_counts(tree, s, k)
    mass = tree.subtree_mass
    terms = [
        binom_abs_dev(int(below[u]), float(min(mass[u], 1.0)), k) * tree.edge_cost[u]
        for u in range(tree.n_nodes)
        if tree.parent[u] >= 0 and tree.edge_cost[u] > 0
    ]
    return math.fsum(terms)


def edge_discrepancy_cost(tree: TreeMetric, s: Placement, x: Placement) -> float:
    """Sum over edges of the count discrepancy across the edge times its cost."""
    if s.k != x.k:
        raise KMismatch(f"placements have {s.k} and {x.k} units")
    diff = np.abs(tree.subtree_counts(tree.lift(s)) - tree.subtree_counts(tree.lift(x)))
    mask = tree.parent >= 0
    return math.fsum(diff[mask] * tree.edge_cost[mask])
