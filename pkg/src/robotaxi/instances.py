"""Instance generators: the star tightness instance, coverage gadgets and random fixtures."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from . import rng
from .core.bundle import InstanceBundle
from .core.metric import DemandDistribution, MetricSpace, make_distribution, validate_metric
from .core.tree import TreeMetric, binarize_tree
from .errors import BadDimensions, InvariantViolation, NotDivisible, OutOfRange, ParseError

# Sub-streams of rng.GENERATOR
_EUCLID, _TREE, _DIST, _DECOYS = 1, 2, 3, 4

DEFAULT_EPSILON = 0.05
MAX_EPSILON = 0.06


def gen_star(n: int, k: int) -> InstanceBundle:
    """Center C (point 0) at distance 1 from n - 1 leaves that are pairwise 2 apart.

    Demand is uniform on the leaves; the center has probability 0.
    """
    if n < 3 or k < 1:
        raise BadDimensions(f"star needs n >= 3 and k >= 1, got n={n}, k={k}")
    probs = np.full(n, 1.0 / (n - 1))
    probs[0] = 0.0
    parent = [-1] + [0] * (n - 1)
    cost = [0.0] + [1.0] * (n - 1)
    labels = ["C"] + [f"x{i}" for i in range(1, n)]
    return InstanceBundle.from_tree(parent, cost, probs, k, labels=labels)


def star_support_bound(n: int, k: int) -> float:
    """Lower bound 2k(1 - k/(n-1))^k on the cost of any placement using only leaves."""
    return 2 * k * (1 - k / (n - 1)) ** k


@dataclass(frozen=True)
class CoverageInstance:
    """A set system over elements 0..N-1 with cover budget ``l``.

    Every set has exactly N / l elements. ``epsilon`` is the gap of the
    distance gadget and must lie in (0, 1] for the gadget to be a metric.
    """

    N: int
    l: int
    sets: tuple[tuple[int, ...], ...]
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.N < 1 or self.l < 1:
            raise InvariantViolation("N and l must be positive")
        if self.N % self.l:
            raise NotDivisible(f"N = {self.N} is not a multiple of l = {self.l}")
        size = self.N // self.l
        sets = tuple(tuple(sorted(int(e) for e in s)) for s in self.sets)
        for s in sets:
            if len(set(s)) != size:
                raise InvariantViolation(f"every set needs exactly {size} distinct elements, got {list(s)}")
            if s and (s[0] < 0 or s[-1] >= self.N):
                raise OutOfRange(f"set {list(s)} has an element outside [0, {self.N})")
        if not sets:
            raise InvariantViolation("set system is empty")
        object.__setattr__(self, "sets", sets)
        if not 0 < self.epsilon <= 1:
            raise OutOfRange(f"epsilon = {self.epsilon} must lie in (0, 1]")
        lo = 2 * self.l / self.N
        if self.epsilon < lo - 1e-12 or self.epsilon > MAX_EPSILON:
            warnings.warn(
                f"epsilon = {self.epsilon:g} is outside the hardness range [{lo:g}, {MAX_EPSILON}]",
                stacklevel=3,
            )

    @property
    def m(self) -> int:
        return len(self.sets)

    def to_dict(self) -> dict:
        return {"N": self.N, "l": self.l, "epsilon": self.epsilon, "sets": [list(s) for s in self.sets]}

    @classmethod
    def from_dict(cls, doc: dict) -> "CoverageInstance":
        try:
            return cls(int(doc["N"]), int(doc["l"]), tuple(doc["sets"]), float(doc.get("epsilon", DEFAULT_EPSILON)))
        except KeyError as exc:
            raise ParseError(f"coverage instance missing field {exc.args[0]!r}") from None


def load_coverage(path) -> CoverageInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    return CoverageInstance.from_dict(doc)


def gen_coverage_reduction(cov: CoverageInstance) -> InstanceBundle:
    """Metric gadget for a coverage instance.

    Points 0..N-1 are elements, N..N+m-1 are sets. Element to set distance
    is 1 for members and 2 - epsilon otherwise; elements are 2 apart and
    sets 1 apart. Demand is uniform over the elements and k = l.
    """
    N, m = cov.N, cov.m
    n = N + m
    d = np.zeros((n, n))
    d[:N, :N] = 2.0
    d[N:, N:] = 1.0
    member = np.zeros((N, m), dtype=bool)
    for j, s in enumerate(cov.sets):
        member[list(s), j] = True
    d[:N, N:] = np.where(member, 1.0, 2.0 - cov.epsilon)
    d[N:, :N] = d[:N, N:].T
    np.fill_diagonal(d, 0.0)
    probs = np.zeros(n)
    probs[:N] = 1.0 / N
    labels = [f"e{i}" for i in range(N)] + [f"S{j}" for j in range(m)]
    return InstanceBundle(validate_metric(d, labels), make_distribution(probs), cov.l)


def gen_full_cover_system(N: int, l: int, epsilon: float = DEFAULT_EPSILON, decoys: int = 0, seed: int = 0) -> CoverageInstance:
    """l disjoint sets partitioning the elements, followed by ``decoys`` random sets.

    ``epsilon`` is raised to 2l/N when the request is smaller, and capped at 1.
    """
    if l < 1 or N < 1:
        raise InvariantViolation("N and l must be positive")
    if N % l:
        raise NotDivisible(f"N = {N} is not a multiple of l = {l}")
    size = N // l
    sets = [tuple(range(i * size, (i + 1) * size)) for i in range(l)]
    gen = rng.stream(seed, rng.GENERATOR, _DECOYS)
    for _ in range(decoys):
        sets.append(tuple(sorted(gen.choice(N, size=size, replace=False).tolist())))
    eps = min(max(2 * l / N, float(epsilon)), 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return CoverageInstance(N, l, tuple(sets), eps)


def full_cover_bounds(k: int, epsilon: float) -> dict:
    """Reference values for the cost of coverage gadgets."""
    e = math.e
    return {
        "full_cover_upper": k * (1 + (1 - 1 / k) ** k),
        "full_cover_upper_limit": k * (1 + 1 / e),
        "partial_cover_lower": k * (1 + math.exp(-1 + 2 / e) - 1 / e - 3 * (1 + 1 / e) * epsilon),
    }


def euclidean_points(n: int, seed: int) -> np.ndarray:
    if n < 2:
        raise BadDimensions(f"need n >= 2, got {n}")
    return rng.stream(seed, rng.GENERATOR, _EUCLID).random((n, 2))


def gen_random_euclidean(n: int, seed: int) -> MetricSpace:
    """n uniform points in the unit square with Euclidean distances."""
    x = euclidean_points(n, seed)
    return validate_metric(cdist(x, x))


def gen_random_distribution(n: int, seed: int, concentration: float = 1.0) -> DemandDistribution:
    """Symmetric Dirichlet draw; small concentrations give peaked distributions."""
    if n < 1 or concentration <= 0:
        raise InvariantViolation("need n >= 1 and a positive concentration")
    p = rng.stream(seed, rng.GENERATOR, _DIST).dirichlet(np.full(n, float(concentration)))
    if not np.all(np.isfinite(p)) or p.sum() <= 0:
        p = np.full(n, 1.0 / n)
    return make_distribution(p / p.sum())


def random_tree_arrays(n: int, seed: int) -> tuple[list[int], list[float]]:
    """Random recursive tree: node i attaches to a uniform earlier node, edge cost in (0, 1]."""
    if n < 2:
        raise BadDimensions(f"need n >= 2, got {n}")
    gen = rng.stream(seed, rng.GENERATOR, _TREE)
    parent = [-1] + [int(gen.integers(0, i)) for i in range(1, n)]
    cost = [0.0] + (1.0 - gen.random(n - 1)).tolist()
    return parent, cost


def gen_random_tree(n: int, seed: int, demand: DemandDistribution | None = None) -> TreeMetric:
    parent, cost = random_tree_arrays(n, seed)
    probs = gen_random_distribution(n, seed).probs if demand is None else demand.probs
    return binarize_tree(parent, cost, probs)


def random_euclidean_bundle(n: int, k: int, seed: int, concentration: float = 1.0) -> InstanceBundle:
    return InstanceBundle(gen_random_euclidean(n, seed), gen_random_distribution(n, seed, concentration), k)


def random_tree_bundle(n: int, k: int, seed: int, concentration: float = 1.0) -> InstanceBundle:
    parent, cost = random_tree_arrays(n, seed)
    probs = gen_random_distribution(n, seed, concentration).probs
    return InstanceBundle.from_tree(parent, cost, probs, k)
