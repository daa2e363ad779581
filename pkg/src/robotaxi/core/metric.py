"""Metric spaces, demand distributions and placements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import (
    DimensionMismatch,
    InvalidMetric,
    InvariantViolation,
    MetricViolation,
    NonSquare,
    OutOfRange,
)

TRIANGLE_RTOL = 1e-9
SUM_TOL = 1e-9
NORMALIZE_TOL = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """A finite metric given by its full distance matrix.

    Build instances with :func:`validate_metric`; the constructor itself only
    checks the shape.
    """

    dist: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise NonSquare(f"distance matrix must be square, got shape {d.shape}")
        object.__setattr__(self, "dist", _frozen(d))
        if self.labels is not None:
            if len(self.labels) != d.shape[0]:
                raise DimensionMismatch("labels length differs from point count")
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def n(self) -> int:
        return self.dist.shape[0]


def metric_violations(d: np.ndarray, rtol: float = TRIANGLE_RTOL) -> list[MetricViolation]:
    """List every violated metric axiom of the square matrix ``d``.

    Symmetric triangle violations are reported once, with ``i < j``.
    """
    n = d.shape[0]
    out: list[MetricViolation] = []
    finite = np.isfinite(d)
    for i, j in zip(*np.nonzero(~finite)):
        out.append(MetricViolation("NonFinite", (int(i), int(j))))
    if out:
        return out
    for i, j in zip(*np.nonzero(d < 0)):
        out.append(MetricViolation("NegativeEntry", (int(i), int(j))))
    for i in np.nonzero(np.diag(d) != 0)[0]:
        out.append(MetricViolation("NonzeroDiagonal", (int(i),)))
    iu, ju = np.nonzero(np.triu(d != d.T, 1))
    for i, j in zip(iu, ju):
        out.append(MetricViolation("AsymmetricPair", (int(i), int(j))))
    tol = rtol * (float(d.max()) if d.size else 0.0)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    for m in range(n):
        slack = d - (d[:, m][:, None] + d[m, :][None, :])
        bad = (slack > tol) & upper
        for i, j in zip(*np.nonzero(bad)):
            out.append(MetricViolation("TriangleViolation", (int(i), m, int(j)), float(slack[i, j])))
    return out


def validate_metric(matrix, labels: Sequence[str] | None = None, rtol: float = TRIANGLE_RTOL) -> MetricSpace:
    """Check the metric axioms and return a :class:`MetricSpace`.

    Raises :class:`NonSquare` for a malformed shape and :class:`InvalidMetric`
    listing every offending entry or triple otherwise.
    """
    try:
        d = np.asarray(matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NonSquare(f"distance matrix is not a numeric array: {exc}") from None
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise NonSquare(f"distance matrix must be square and non-empty, got shape {d.shape}")
    violations = metric_violations(d, rtol)
    if violations:
        raise InvalidMetric(violations)
    return MetricSpace(d, tuple(labels) if labels is not None else None)


@dataclass(frozen=True, eq=False)
class DemandDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvariantViolation("probabilities must be a non-empty vector")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvariantViolation("probabilities must be finite and non-negative")
        if abs(float(p.sum()) - 1.0) > SUM_TOL:
            raise InvariantViolation(f"probabilities sum to {p.sum():.12g}, not 1")
        object.__setattr__(self, "probs", _frozen(p))

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)


def make_distribution(probs, tol: float = NORMALIZE_TOL) -> DemandDistribution:
    """Accept ``probs`` summing to 1 within ``tol``, normalizing if needed.

    Vectors already within 1e-9 of summing to 1 are kept bit-for-bit.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvariantViolation("probabilities must be a non-empty vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvariantViolation("probabilities must be finite and non-negative")
    s = float(p.sum())
    if abs(s - 1.0) > tol:
        raise InvariantViolation(f"probabilities sum to {s:.12g}, not 1")
    return DemandDistribution(p if abs(s - 1.0) <= SUM_TOL else p / s)


@dataclass(frozen=True)
class Placement:
    """A k-multiset of points, stored as per-point multiplicities."""

    counts: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.counts)
        if any(x < 0 for x in c):
            raise InvariantViolation("placement counts must be non-negative")
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_points(cls, points: Iterable[int], n: int) -> "Placement":
        c = [0] * n
        for p in points:
            p = int(p)
            if not 0 <= p < n:
                raise OutOfRange(f"point id {p} outside [0, {n})")
            c[p] += 1
        return cls(tuple(c))

    @classmethod
    def from_array(cls, counts) -> "Placement":
        return cls(tuple(int(x) for x in np.asarray(counts).ravel()))

    @property
    def k(self) -> int:
        return sum(self.counts)

    @property
    def n(self) -> int:
        return len(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    def points(self) -> np.ndarray:
        """The multiset expanded to a sorted array of ``k`` point ids."""
        return np.repeat(np.arange(self.n), self.counts)

    def padded(self, n: int) -> "Placement":
        if n < self.n:
            if any(self.counts[n:]):
                raise DimensionMismatch("cannot truncate a placement with mass beyond the new size")
            return Placement(self.counts[:n])
        return Placement(self.counts + (0,) * (n - self.n))


def point_mass(u: Placement) -> DemandDistribution:
    """The empirical distribution with mass ``count / k`` on each point."""
    if u.k < 1:
        raise InvariantViolation("point mass of an empty placement")
    return DemandDistribution(u.as_array() / u.k)
