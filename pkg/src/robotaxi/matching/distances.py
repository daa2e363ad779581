"""Matching distance between k-multisets and Wasserstein distance between distributions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core.metric import DemandDistribution, MetricSpace, Placement
from ..errors import DimensionMismatch, EmptyAllowableSet, OutOfRange, SizeMismatch, TooLarge
from .flow import min_cost_transport

BRUTE_FORCE_MAX_K = 8


@dataclass(frozen=True)
class MatchingPlan:
    """A min-cost perfect matching, aggregated by (source, target) point pair."""

    pairs: tuple[tuple[int, int, int, float], ...]  # (source, target, multiplicity, unit distance)
    total_cost: float

    def to_dict(self) -> dict:
        return {
            "total_cost": self.total_cost,
            "pairs": [{"source": s, "target": t, "multiplicity": m, "distance": d} for s, t, m, d in self.pairs],
        }


@dataclass(frozen=True)
class TransportPlan:
    entries: tuple[tuple[int, int, float, float], ...]  # (source, target, mass, unit distance)
    total_cost: float

    def marginals(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = np.zeros(n), np.zeros(n)
        for s, t, mass, _ in self.entries:
            rows[s] += mass
            cols[t] += mass
        return rows, cols

    def to_dict(self) -> dict:
        return {
            "total_cost": self.total_cost,
            "entries": [{"source": s, "target": t, "mass": m, "distance": d} for s, t, m, d in self.entries],
        }


def _check_pair(space: MetricSpace, u: Placement, v: Placement) -> None:
    if u.n != space.n or v.n != space.n:
        raise DimensionMismatch(f"placements over {u.n} and {v.n} points, metric has {space.n}")
    if u.k != v.k:
        raise SizeMismatch(f"multisets of different sizes: {u.k} vs {v.k}")
    if u.k < 1:
        raise SizeMismatch("multisets must be non-empty")


def _assignment(dist: np.ndarray, u: np.ndarray, v: np.ndarray):
    """Optimal unit pairs between count vectors ``u`` and ``v``.

    Shared points are matched to themselves first; some optimal matching
    always does this in a metric space, and it shrinks the assignment problem.
    """
    common = np.minimum(u, v)
    a = np.repeat(np.arange(u.size), u - common)
    b = np.repeat(np.arange(v.size), v - common)
    if a.size == 0:
        return common, a, b
    rows, cols = linear_sum_assignment(dist[np.ix_(a, b)])
    return common, a[rows], b[cols]


def matching_value(dist: np.ndarray, u, v) -> float:
    """d_k between count vectors, without validation or plan construction."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if tuple(u) > tuple(v):
        u, v = v, u
    _, a, b = _assignment(dist, u, v)
    return math.fsum(dist[a, b])


def matching_cost(space: MetricSpace, u: Placement, v: Placement) -> MatchingPlan:
    """Minimum-cost perfect matching between two k-multisets; ``total_cost`` is d_k(u, v)."""
    _check_pair(space, u, v)
    flip = u.counts > v.counts
    lo, hi = (v, u) if flip else (u, v)
    common, a, b = _assignment(space.dist, lo.as_array(), hi.as_array())
    agg: dict[tuple[int, int], int] = {}
    for x in np.flatnonzero(common):
        agg[(int(x), int(x))] = int(common[x])
    for x, y in zip(a.tolist(), b.tolist()):
        agg[(x, y)] = agg.get((x, y), 0) + 1
    if flip:
        agg = {(y, x): m for (x, y), m in agg.items()}
    d = space.dist
    pairs = tuple(sorted((x, y, m, float(d[x, y])) for (x, y), m in agg.items()))
    return MatchingPlan(pairs, math.fsum(d[a, b]))


def brute_force_matching(space: MetricSpace, u: Placement, v: Placement) -> float:
    """d_k by trying every permutation; a test oracle for small k."""
    _check_pair(space, u, v)
    if u.k > BRUTE_FORCE_MAX_K:
        raise TooLarge(f"brute force matching limited to k <= {BRUTE_FORCE_MAX_K}, got {u.k}")
    a = u.points()
    b = v.points()
    d = space.dist
    best = math.inf
    for perm in set(itertools.permutations(b.tolist())):
        best = min(best, math.fsum(d[a, list(perm)]))
    return best


def wasserstein(space: MetricSpace, mu: DemandDistribution, nu: DemandDistribution) -> TransportPlan:
    """Optimal transport between two distributions; ``total_cost`` is d_W(mu, nu)."""
    if mu.n != space.n or nu.n != space.n:
        raise DimensionMismatch(f"distributions over {mu.n} and {nu.n} points, metric has {space.n}")
    src = mu.support
    dst = nu.support
    res = min_cost_transport(mu.probs[src], nu.probs[dst], space.dist[np.ix_(src, dst)])
    entries = []
    for i, j in zip(*np.nonzero(res.flow)):
        x, y = int(src[i]), int(dst[j])
        entries.append((x, y, float(res.flow[i, j]), float(space.dist[x, y])))
    return TransportPlan(tuple(entries), res.cost)


def nearest_allowable(space: MetricSpace, allowable) -> np.ndarray:
    """For every point, the closest allowable point (ties go to the lowest id)."""
    a = np.asarray(sorted({int(x) for x in allowable}), dtype=np.int64)
    if a.size == 0:
        raise EmptyAllowableSet("allowable set is empty")
    if a[0] < 0 or a[-1] >= space.n:
        raise OutOfRange("allowable point id outside the metric")
    return a[np.argmin(space.dist[:, a], axis=1)]


def project_to_allowable(space: MetricSpace, s: Placement, allowable) -> Placement:
    """T(S): move every unit of ``s`` to its nearest allowable point.

    The cost d_k(S, T) of any T drawn from the allowable set is at least the
    sum of each unit's distance to the allowable set, and this projection
    attains that sum, so it minimizes d_k(S, .) over allowable multisets.
    """
    if s.n != space.n:
        raise DimensionMismatch(f"placement over {s.n} points, metric has {space.n}")
    target = nearest_allowable(space, allowable)
    out = np.zeros(space.n, dtype=np.int64)
    np.add.at(out, target, s.as_array())
    return Placement.from_array(out)
