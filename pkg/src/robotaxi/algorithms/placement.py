"""Randomized placement algorithms.

Each drawn unit ``i`` uses its own random stream ``(seed, tag, i)``, so the
first units of a placement do not change when ``k`` grows.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .. import rng
from ..core.bundle import InstanceBundle
from ..core.metric import DemandDistribution, MetricSpace, Placement
from ..errors import EmptyAllowableSet, InvariantViolation
from ..evaluation.exact import enumerate_multisets
from ..matching.distances import nearest_allowable, project_to_allowable

# Guards floor(P(x) k) against P(x) k landing a few ulps below an integer.
FLOOR_EPS = 1e-9


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise InvariantViolation(f"fleet size k must be a positive integer, got {k}")
    return int(k)


def _draw_units(probs: np.ndarray, count: int, seed: int, tag: int) -> np.ndarray:
    cdf = rng.cumulative(probs)
    u = np.array([rng.stream(seed, tag, i).random() for i in range(count)])
    return np.bincount(rng.inverse_cdf(cdf, u), minlength=probs.size).astype(np.int64)


def rp_place(demand: DemandDistribution, k: int, seed: int) -> Placement:
    """k independent draws from the demand distribution."""
    k = _check_k(k)
    return Placement.from_array(_draw_units(demand.probs, k, seed, rng.RP))


def vrrp_split(probs: np.ndarray, k: int) -> tuple[np.ndarray, int, np.ndarray]:
    """Deterministic floors, residual unit count and normalized residual probabilities."""
    p = np.asarray(probs, dtype=float)
    base = np.floor(p * k + FLOOR_EPS).astype(np.int64)
    r = k - int(base.sum())
    residual = np.clip(p - base / k, 0.0, None)
    if r > 0 and residual.sum() <= 0:
        residual = p.copy()
    if r > 0:
        residual = residual / residual.sum()
    return base, r, residual


def vrrp_place(demand: DemandDistribution, k: int, seed: int) -> Placement:
    """floor(P(x) k) units at each x, the rest drawn in proportion to the leftover probability."""
    k = _check_k(k)
    base, r, residual = vrrp_split(demand.probs, k)
    if r == 0:
        return Placement.from_array(base)
    return Placement.from_array(base + _draw_units(residual, r, seed, rng.VRRP))


def rrp_place(bundle: InstanceBundle, seed: int, allowable=None) -> Placement:
    """Random placement moved onto the allowable set.

    ``allowable`` defaults to the bundle's allowable set; a bundle without one
    allows every point.
    """
    if allowable is None:
        allowable = bundle.allowable if bundle.allowable is not None else range(bundle.n)
    allowable = list(allowable)
    if not allowable:
        raise EmptyAllowableSet("allowable set is empty")
    s = rp_place(bundle.demand, bundle.k, seed)
    return project_to_allowable(bundle.metric, s, allowable)


# Exact output distributions, used to check the approximation guarantees by enumeration.

def rp_distribution(probs, k: int) -> tuple[np.ndarray, np.ndarray]:
    return enumerate_multisets(probs, _check_k(k))


def vrrp_distribution(probs, k: int) -> tuple[np.ndarray, np.ndarray]:
    k = _check_k(k)
    base, r, residual = vrrp_split(probs, k)
    if r == 0:
        return base[None, :], np.ones(1)
    counts, weights = enumerate_multisets(residual, r)
    return counts + base[None, :], weights


def rrp_distribution(space: MetricSpace, probs, k: int, allowable) -> tuple[np.ndarray, np.ndarray]:
    target = nearest_allowable(space, allowable)
    counts, weights = enumerate_multisets(probs, _check_k(k))
    merged: dict[tuple, list[float]] = defaultdict(list)
    for c, w in zip(counts, weights):
        out = np.zeros(space.n, dtype=np.int64)
        np.add.at(out, target, c)
        merged[tuple(out.tolist())].append(float(w))
    keys = sorted(merged)
    return np.array(keys, dtype=np.int64), np.array([math.fsum(merged[key]) for key in keys])
