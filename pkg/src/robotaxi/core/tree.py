"""Rooted binary tree metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    CyclicInput,
    DimensionMismatch,
    DisconnectedInput,
    NegativeEdgeCost,
    NotATree,
    NotBinary,
)
from .metric import DemandDistribution, MetricSpace, Placement, _frozen, make_distribution


@dataclass(frozen=True, eq=False)
class TreeMetric:
    """A rooted tree in which every internal node has exactly two children.

    ``edge_cost[u]`` is the cost of the edge from ``parent[u]`` to ``u`` (zero
    at the root). Nodes ``0 .. n_original - 1`` are the points of the tree the
    instance was built from; any further nodes were introduced by
    :func:`binarize_tree` and sit at distance 0 from ``origin[u]``.
    """

    parent: np.ndarray
    left: np.ndarray
    right: np.ndarray
    edge_cost: np.ndarray
    demand: DemandDistribution
    origin: np.ndarray
    n_original: int

    def __post_init__(self):
        for name in ("parent", "left", "right", "origin"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.int64)))
        object.__setattr__(self, "edge_cost", _frozen(np.asarray(self.edge_cost, dtype=float)))
        n = self.parent.shape[0]
        if any(a.shape != (n,) for a in (self.left, self.right, self.edge_cost, self.origin)) or self.demand.n != n:
            raise DimensionMismatch("tree arrays must all have one entry per node")
        if np.any(self.edge_cost < 0):
            raise NegativeEdgeCost("edge costs must be non-negative")
        roots = np.flatnonzero(self.parent < 0)
        if roots.size != 1:
            raise NotATree(f"expected exactly one root, found {roots.size}")
        if np.any((self.left < 0) != (self.right < 0)):
            raise NotBinary("every internal node needs exactly two children")
        order = _postorder(self.left, self.right, int(roots[0]))
        if len(order) != n:
            raise DisconnectedInput("child pointers do not reach every node")
        object.__setattr__(self, "_order", _frozen(np.asarray(order, dtype=np.int64)))
        object.__setattr__(self, "_mass", _frozen(_masses(self.demand.probs, self.left, self.right, order)))

    @property
    def n_nodes(self) -> int:
        return self.parent.shape[0]

    @property
    def root(self) -> int:
        return int(self._order[-1])

    @property
    def probs(self) -> np.ndarray:
        return self.demand.probs

    @property
    def postorder(self) -> np.ndarray:
        """Node ids, children before parents."""
        return self._order

    @property
    def subtree_mass(self) -> np.ndarray:
        return self._mass

    def is_leaf(self, u: int) -> bool:
        return self.left[u] < 0

    def distance_matrix(self) -> np.ndarray:
        """All-pairs path lengths over every tree node."""
        n = self.n_nodes
        depth = np.zeros(n)
        for u in self._order[::-1]:
            if self.parent[u] >= 0:
                depth[u] = depth[self.parent[u]] + self.edge_cost[u]
        # top-down: outside T_u go through the parent, inside T_u use depth differences
        d = np.zeros((n, n))
        d[self.root, :] = depth
        d[:, self.root] = depth
        for u in self._order[::-1]:
            p = self.parent[u]
            if p < 0:
                continue
            d[u, :] = d[p, :] + self.edge_cost[u]
            inside = _subtree_nodes(self, u)
            d[u, inside] = depth[inside] - depth[u]
            d[:, u] = d[u, :]
        return d

    def metric(self) -> MetricSpace:
        """The metric induced on the original points."""
        n = self.n_original
        return MetricSpace(self.distance_matrix()[:n, :n])

    def lift(self, s: Placement) -> np.ndarray:
        """Counts over all tree nodes for a placement over original or tree nodes."""
        if s.n not in (self.n_original, self.n_nodes):
            raise DimensionMismatch(f"placement has {s.n} points, tree has {self.n_original} ({self.n_nodes} nodes)")
        c = np.zeros(self.n_nodes, dtype=np.int64)
        c[: s.n] = s.counts
        return c

    def project(self, counts) -> Placement:
        """Fold counts over tree nodes back onto the original points."""
        out = np.zeros(self.n_original, dtype=np.int64)
        np.add.at(out, self.origin, np.asarray(counts, dtype=np.int64))
        return Placement.from_array(out)

    def subtree_counts(self, counts) -> np.ndarray:
        """Total count inside T_u for every node u."""
        tot = np.asarray(counts, dtype=np.int64).copy()
        for u in self._order:
            if self.left[u] >= 0:
                tot[u] += tot[self.left[u]] + tot[self.right[u]]
        return tot


def _postorder(left, right, root) -> list[int]:
    order, stack, seen = [], [(root, False)], set()
    while stack:
        u, done = stack.pop()
        if done:
            order.append(u)
            continue
        if u in seen:
            raise CyclicInput(f"node {u} reached twice")
        seen.add(u)
        stack.append((u, True))
        if left[u] >= 0:
            stack.append((int(right[u]), False))
            stack.append((int(left[u]), False))
    return order


def _masses(probs, left, right, order) -> np.ndarray:
    m = np.asarray(probs, dtype=float).copy()
    for u in order:
        if left[u] >= 0:
            m[u] = probs[u] + m[left[u]] + m[right[u]]
    return m


def _subtree_nodes(tree: TreeMetric, u: int) -> np.ndarray:
    out, stack = [], [u]
    while stack:
        v = stack.pop()
        out.append(v)
        if tree.left[v] >= 0:
            stack.extend((int(tree.left[v]), int(tree.right[v])))
    return np.asarray(out, dtype=np.int64)


def subtree_masses(tree: TreeMetric) -> np.ndarray:
    """p_u: the demand probability inside the subtree rooted at each node."""
    return tree.subtree_mass


def binarize_tree(parent, edge_cost, probs) -> TreeMetric:
    """Turn an arbitrary rooted tree into an equivalent binary :class:`TreeMetric`.

    ``parent[u]`` is -1 at the single root; ``edge_cost[u]`` is the cost of the
    edge to the parent (ignored at the root). A node with ``c > 2`` children is
    expanded into a left-leaning chain of ``c - 1`` binary nodes joined by
    zero-cost edges; each original child keeps its own edge cost. A node with
    one child gets a zero-cost, zero-probability sibling leaf. Introduced nodes
    carry probability 0 and are appended after the original ids, so every
    pairwise distance between original nodes is preserved.
    """
    parent = [int(x) for x in np.asarray(parent).ravel()]
    n = len(parent)
    cost = np.asarray(edge_cost, dtype=float).ravel()
    p = np.asarray(probs, dtype=float).ravel()
    if cost.shape != (n,) or p.shape != (n,):
        raise DimensionMismatch("parent, edge_cost and probs must have equal length")
    if n == 0:
        raise NotATree("empty tree")
    roots = [u for u in range(n) if parent[u] < 0]
    if not roots:
        raise CyclicInput("no root: every node has a parent")
    if len(roots) != 1:
        raise DisconnectedInput(f"expected exactly one root, found {len(roots)}")
    if any(not (-1 <= q < n) for q in parent):
        raise NotATree("parent id out of range")
    root = roots[0]
    bad = [u for u in range(n) if u != root and not (np.isfinite(cost[u]) and cost[u] >= 0)]
    if bad:
        raise NegativeEdgeCost(f"negative or non-finite edge cost at node(s) {bad[:5]}")
    _check_acyclic(parent, root)

    children: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        if u != root:
            children[parent[u]].append(u)

    par = list(parent)
    ec = [0.0 if u == root else float(cost[u]) for u in range(n)]
    pr = list(p)
    origin = list(range(n))
    left = [-1] * n
    right = [-1] * n

    def new_node(of: int, up: int) -> int:
        par.append(up)
        ec.append(0.0)
        pr.append(0.0)
        origin.append(of)
        left.append(-1)
        right.append(-1)
        return len(par) - 1

    for u in range(n):
        ch = children[u]
        if not ch:
            continue
        if len(ch) == 1:
            left[u], right[u] = ch[0], new_node(u, u)
            continue
        cur, rest = u, list(ch)
        while len(rest) > 2:
            last = rest.pop()
            nxt = new_node(u, cur)
            left[cur], right[cur] = nxt, last
            par[last] = cur
            cur = nxt
        left[cur], right[cur] = rest
        par[rest[0]] = cur
        par[rest[1]] = cur

    demand = make_distribution(pr)
    return TreeMetric(np.array(par), np.array(left), np.array(right), np.array(ec), demand, np.array(origin), n)


def _check_acyclic(parent: list[int], root: int) -> None:
    n = len(parent)
    state = [0] * n  # 0 unknown, 1 on current walk, 2 reaches root
    state[root] = 2
    for start in range(n):
        walk, u = [], start
        while state[u] == 0:
            state[u] = 1
            walk.append(u)
            u = parent[u]
            if u < 0:
                raise DisconnectedInput(f"node {walk[-1]} has no path to the root")
        if state[u] == 1:
            raise CyclicInput(f"cycle through node {u}")
        for w in walk:
            state[w] = 2
