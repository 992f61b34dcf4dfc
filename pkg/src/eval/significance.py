"""
Wilcoxon signed-rank test on paired per-fold accuracies.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata

from .metrics import ExperimentError

ALPHA = 0.05
EXACT_LIMIT = 12
DECIMALS = 12


@dataclass(frozen=True)
class SignificanceResult:
    w: float
    n_effective: int
    p_value: float
    method: str

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA


def exact_p_value(ranks: np.ndarray, w: float) -> float:
    """
    Two-sided p over all 2^n sign patterns of `ranks`: the share of patterns
    whose positive-rank sum is at least as far from the mean as `w`.
    """
    n = ranks.shape[0]
    patterns = np.arange(2 ** n, dtype=np.int64)
    signs = (patterns[:, None] >> np.arange(n, dtype=np.int64)) & 1
    sums = signs @ ranks
    center = ranks.sum() / 2.0
    extreme = np.abs(sums - center) >= abs(w - center) - 1e-9
    return float(min(1.0, extreme.sum() / patterns.shape[0]))


def normal_p_value(ranks: np.ndarray, w: float) -> float:
    """Normal approximation with continuity and tie correction."""
    n = ranks.shape[0]
    _, ties = np.unique(ranks, return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(ties ** 3 - ties) / 48.0
    if variance <= 0:
        return 1.0
    center = n * (n + 1) / 4.0
    z = max(abs(w - center) - 0.5, 0.0) / np.sqrt(variance)
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon(a: Sequence[float], b: Sequence[float]) -> SignificanceResult:
    """
    Paired two-sided signed-rank test of a against b.

    Differences are rounded to 12 decimals, then zero differences are
    dropped and |d| ties get average ranks. Exact enumeration up to 12
    non-zero differences, normal approximation above.
    """
    if len(a) != len(b):
        raise ExperimentError(f"Paired samples differ in length: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ExperimentError("Need at least 2 paired values")

    # Accuracies equal as fractions can differ in the last bits
    differences = np.round(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64), DECIMALS)
    differences = differences[differences != 0]
    n = int(differences.shape[0])
    if n == 0:
        return SignificanceResult(w=0.0, n_effective=0, p_value=1.0, method="exact")

    ranks = rankdata(np.abs(differences))
    w = float(ranks[differences > 0].sum())
    if n <= EXACT_LIMIT:
        return SignificanceResult(w=w, n_effective=n, p_value=exact_p_value(ranks, w), method="exact")
    return SignificanceResult(
        w=w, n_effective=n, p_value=normal_p_value(ranks, w), method="normal-approximation"
    )
