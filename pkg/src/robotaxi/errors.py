"""Exception hierarchy.

Every domain failure derives from :class:`RobotaxiError`; the CLI maps those
to exit code 1 and everything else (usage) to exit code 2.
"""

from __future__ import annotations

from dataclasses import dataclass


class RobotaxiError(Exception):
    """Base class for all domain errors raised by this package."""


class InvariantViolation(RobotaxiError, ValueError):
    pass


class DimensionMismatch(InvariantViolation):
    pass


class SizeMismatch(InvariantViolation):
    """Two placements that should have the same size ``k`` do not."""


class KMismatch(SizeMismatch):
    pass


class OutOfRange(InvariantViolation):
    pass


class TooLarge(RobotaxiError):
    """An exhaustive routine was asked to enumerate more than it allows."""


class EmptyAllowableSet(InvariantViolation):
    pass


class NonSquare(InvariantViolation):
    pass


@dataclass(frozen=True)
class MetricViolation:
    """One violated metric axiom.

    ``kind`` is one of ``NegativeEntry``, ``NonFinite``, ``NonzeroDiagonal``,
    ``AsymmetricPair`` or ``TriangleViolation``. For triangle violations
    ``indices`` is ``(i, m, j)`` with ``dist[i][j] > dist[i][m] + dist[m][j]``
    and ``slack`` is the excess.
    """

    kind: str
    indices: tuple[int, ...]
    slack: float = 0.0

    def __str__(self) -> str:
        args = ",".join(str(i) for i in self.indices)
        if self.kind == "TriangleViolation":
            return f"{self.kind}({args}, slack={self.slack:.6g})"
        return f"{self.kind}({args})"


class InvalidMetric(InvariantViolation):
    def __init__(self, violations: list[MetricViolation]):
        self.violations = list(violations)
        shown = "; ".join(str(v) for v in self.violations[:10])
        more = len(self.violations) - 10
        if more > 0:
            shown += f"; ... {more} more"
        super().__init__(f"{len(self.violations)} metric violation(s): {shown}")


class NotATree(InvariantViolation):
    pass


class CyclicInput(NotATree):
    pass


class DisconnectedInput(NotATree):
    pass


class NegativeEdgeCost(NotATree):
    pass


class NotBinary(NotATree):
    pass


class ParseError(RobotaxiError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownZone(ParseError):
    def __init__(self, zone, line: int):
        self.zone = zone
        super().__init__(f"unknown pickup zone {zone!r}", line)


class EmptyFile(ParseError):
    pass


class NotDivisible(InvariantViolation):
    pass


class BadDimensions(InvariantViolation):
    pass


class Infeasible(RobotaxiError):
    pass


class TimeLimitExceeded(RobotaxiError):
    """Raised when a time limit expires before any feasible solution exists."""
