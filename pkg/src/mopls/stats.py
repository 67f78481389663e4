"""Two-sided Mann-Whitney U test with midranks."""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

EXACT_LIMIT = 400
SIGNIFICANCE = 0.05


class MannWhitneyResult(NamedTuple):
    u: float
    p_value: float
    exact: bool


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the average of their positions."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    ranks = np.empty(len(values))
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _exact_p(doubled: np.ndarray, n: int, observed: int) -> float:
    """Permutation p-value of the doubled rank sum of a size-``n`` subset."""
    total = int(doubled.sum())
    counts = np.zeros((n + 1, total + 1))
    counts[0, 0] = 1.0
    for r in doubled.astype(int):
        counts[1:, r:] += counts[:-1, : total + 1 - r].copy()
    dist = counts[n]
    dist = dist / dist.sum()
    lower = dist[: observed + 1].sum()
    upper = dist[observed:].sum()
    return float(min(1.0, 2 * min(lower, upper)))


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """U statistic of ``a`` and its two-sided p-value.

    Exact conditional permutation distribution (ties included) when
    ``len(a) * len(b) <= 400``, otherwise the normal approximation with tie
    and continuity correction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    if n < 3 or m < 3:
        raise ValueError("both samples need at least 3 values")
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    u = float(ranks[:n].sum() - n * (n + 1) / 2)
    if np.all(pooled == pooled[0]):
        return MannWhitneyResult(u, 1.0, n * m <= EXACT_LIMIT)
    if n * m <= EXACT_LIMIT:
        doubled = np.rint(2 * ranks).astype(int)
        return MannWhitneyResult(u, _exact_p(doubled, n, int(doubled[:n].sum())), True)
    N = n + m
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (N * (N - 1))
    sigma = math.sqrt(n * m / 12 * ((N + 1) - tie_term))
    z = (abs(u - n * m / 2) - 0.5) / sigma
    p = math.erfc(max(z, 0.0) / math.sqrt(2))
    return MannWhitneyResult(u, min(1.0, p), False)


def significantly_greater(a: Sequence[float], b: Sequence[float], alpha: float = SIGNIFICANCE) -> bool:
    """``a`` tends to exceed ``b`` and the two-sided test rejects at ``alpha``."""
    res = mann_whitney_u(a, b)
    return res.u > len(a) * len(b) / 2 and res.p_value < alpha
