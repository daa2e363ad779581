"""Monte Carlo estimation of the expected matching cost."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import rng
from ..core.bundle import InstanceBundle
from ..core.metric import Placement
from ..errors import InvariantViolation, KMismatch
from ..matching.distances import matching_value

Z95 = 1.96


@dataclass(frozen=True)
class CostEstimate:
    mean: float
    std_error: float
    ci95_halfwidth: float
    samples: int
    seed: int
    k: int = 1

    @classmethod
    def from_samples(cls, costs, seed: int, k: int) -> "CostEstimate":
        costs = [float(c) for c in costs]
        m = len(costs)
        mean = math.fsum(costs) / m
        if m > 1:
            sd = math.sqrt(math.fsum((c - mean) ** 2 for c in costs) / (m - 1))
        else:
            sd = 0.0
        se = sd / math.sqrt(m)
        return cls(mean, se, Z95 * se, m, int(seed), int(k))

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.std_error,
            "ci95": self.ci95_halfwidth,
            "samples": self.samples,
            "seed": self.seed,
            "k": self.k,
            "per_rider_mean": self.mean / self.k,
            "per_rider_ci95": self.ci95_halfwidth / self.k,
        }


def sample_counts(cdf: np.ndarray, k: int, gen: np.random.Generator) -> np.ndarray:
    """k i.i.d. draws from the distribution with cumulative array ``cdf``, as counts."""
    idx = rng.inverse_cdf(cdf, gen.random(k))
    return np.bincount(idx, minlength=cdf.size)


def realization(cdf: np.ndarray, k: int, seed: int, index: int, tag: int = rng.REALIZATION) -> np.ndarray:
    """Demand realization number ``index`` of the stream ``(seed, tag)``."""
    return sample_counts(cdf, k, rng.stream(seed, tag, index))


def realization_costs(dist: np.ndarray, s, cdf: np.ndarray, k: int, seed: int, indices, threads: int = 1,
                      tag: int = rng.REALIZATION) -> np.ndarray:
    """Matching cost of ``s`` against each indexed realization, in index order."""
    u = np.asarray(s, dtype=np.int64)

    def one(i: int) -> float:
        return matching_value(dist, u, realization(cdf, k, seed, i, tag))

    indices = list(indices)
    if threads <= 1:
        return np.array([one(i) for i in indices])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(one, indices)))


def mc_cost(bundle: InstanceBundle, s: Placement, samples: int, seed: int, threads: int = 1) -> CostEstimate:
    """Estimate E[d_k(s, X)] from ``samples`` independent demand realizations.

    Realization ``i`` comes from its own random stream, and the per-sample
    costs are reduced in index order, so the result does not depend on
    ``threads``.
    """
    if s.k != bundle.k:
        raise KMismatch(f"placement has {s.k} units, instance has k = {bundle.k}")
    if s.n != bundle.n:
        raise InvariantViolation(f"placement over {s.n} points, instance has {bundle.n}")
    if samples < 2:
        raise InvariantViolation("Monte Carlo needs at least 2 samples")
    cdf = rng.cumulative(bundle.probs)
    costs = realization_costs(bundle.dist, s.as_array(), cdf, bundle.k, seed, range(samples), threads)
    return CostEstimate.from_samples(costs, seed, bundle.k)
