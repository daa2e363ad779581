"""Exact placement on tree metrics by dynamic programming over subtrees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.metric import Placement
from ..core.tree import TreeMetric
from ..errors import InvariantViolation, KMismatch
from ..evaluation.binomial import binom_abs_dev_table


@dataclass(frozen=True, eq=False)
class DpTable:
    """``values[u, t]`` is V(u, t); ``back_left``/``back_right`` hold the chosen child split (-1 at leaves)."""

    values: np.ndarray
    back_left: np.ndarray
    back_right: np.ndarray


def _best_splits(a_left: np.ndarray, a_right: np.ndarray):
    """For every t, the split (tl, tr) with tl + tr <= t minimizing a_left[tl] + a_right[tr].

    Ties go to the smallest tl, then the smallest tr. The minimum for budget
    t is the better of the minimum for t - 1 and the best split with
    tl + tr == t exactly, so each budget costs one pass over a diagonal.
    """
    k = a_left.size - 1
    values = np.empty(k + 1)
    tls = np.empty(k + 1, dtype=np.int64)
    trs = np.empty(k + 1, dtype=np.int64)
    best = (np.inf, 0, 0)
    for t in range(k + 1):
        diag = a_left[: t + 1] + a_right[t::-1]
        tl = int(np.argmin(diag))
        cand = (float(diag[tl]), tl, t - tl)
        if cand < best:
            best = cand
        values[t], tls[t], trs[t] = best
    return values, tls, trs


def tree_dp_solve(tree: TreeMetric, k: int) -> tuple[Placement, float, DpTable]:
    """Optimal k-placement on a binary tree metric.

    Returns the placement over the tree's original points, its expected
    cost V(root, k), and the full table.
    """
    if int(k) != k or k < 1:
        raise KMismatch(f"fleet size k must be a positive integer, got {k}")
    k = int(k)
    n = tree.n_nodes
    mass = np.minimum(tree.subtree_mass, 1.0)
    V = np.zeros((n, k + 1))
    back_l = np.full((n, k + 1), -1, dtype=np.int64)
    back_r = np.full((n, k + 1), -1, dtype=np.int64)
    # edge term B(t, p_u) c(u) of the edge above u, for every t
    edge_term = np.zeros((n, k + 1))
    for u in range(n):
        if tree.parent[u] >= 0 and tree.edge_cost[u] > 0:
            edge_term[u] = binom_abs_dev_table(float(mass[u]), k) * tree.edge_cost[u]
    for u in tree.postorder:
        if tree.is_leaf(u):
            continue
        l, r = tree.left[u], tree.right[u]
        V[u], back_l[u], back_r[u] = _best_splits(V[l] + edge_term[l], V[r] + edge_term[r])

    counts = np.zeros(n, dtype=np.int64)
    stack = [(tree.root, k)]
    while stack:
        u, t = stack.pop()
        if tree.is_leaf(u):
            counts[u] += t
            continue
        tl, tr = int(back_l[u, t]), int(back_r[u, t])
        counts[u] += t - tl - tr
        stack.append((int(tree.left[u]), tl))
        stack.append((int(tree.right[u]), tr))
    if counts.sum() != k:
        raise InvariantViolation("placement reconstruction lost units")
    return tree.project(counts), float(V[tree.root, k]), DpTable(V, back_l, back_r)
