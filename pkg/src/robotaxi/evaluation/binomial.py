"""Expected absolute deviation of a binomial count from a fixed integer."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..errors import OutOfRange

# Below this (1 - p)**k underflows far enough that the forward recurrence loses accuracy.
_RECURRENCE_FLOOR = 1e-280


def binom_pmf(k: int, p: float) -> np.ndarray:
    """Probabilities of Binomial(k, p) at 0..k.

    Uses the ratio recurrence from s = 0 after mirroring so that p <= 1/2.
    When (1 - p)**k would underflow, the recurrence instead starts at the
    mode, whose value comes from log-gamma functions.
    """
    k = int(k)
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"probability {p} outside [0, 1]")
    out = np.zeros(k + 1)
    if p == 0.0:
        out[0] = 1.0
        return out
    if p == 1.0:
        out[k] = 1.0
        return out
    flip = p > 0.5
    q = 1.0 - p if flip else p
    start = (1.0 - q) ** k
    if start > _RECURRENCE_FLOOR:
        ratio = q / (1.0 - q)
        out[0] = start
        for s in range(k):
            out[s + 1] = out[s] * (k - s) / (s + 1) * ratio
    else:
        # anchor at the mode in log space, recur outward, then renormalize
        mode = min(int((k + 1) * q), k)
        out[mode] = math.exp(
            gammaln(k + 1) - gammaln(mode + 1) - gammaln(k - mode + 1) + mode * math.log(q) + (k - mode) * math.log1p(-q)
        )
        ratio = q / (1.0 - q)
        for s in range(mode, k):
            out[s + 1] = out[s] * (k - s) / (s + 1) * ratio
        for s in range(mode, 0, -1):
            out[s - 1] = out[s] * s / (k - s + 1) / ratio
        out /= math.fsum(out)
    return out[::-1].copy() if flip else out


def binom_abs_dev(t: int, p: float, k: int) -> float:
    """B(t, p) = E|t - S| for S ~ Binomial(k, p)."""
    if not 0 <= t <= k:
        raise OutOfRange(f"t = {t} outside [0, {k}]")
    pmf = binom_pmf(k, p)
    return math.fsum(np.abs(t - np.arange(k + 1)) * pmf)


def binom_abs_dev_table(p: float, k: int) -> np.ndarray:
    """B(t, p) for every t in 0..k."""
    pmf = binom_pmf(k, p)
    s = np.arange(k + 1)
    return np.abs(s[:, None] - s[None, :]) @ pmf
