"""Rank-based tests for comparing model variants across cycles.

Both tests use midranks with tie correction and asymptotic p-values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _sps

from .exceptions import DataError


class Method(enum.Enum):
    KRUSKAL_WALLIS = "kruskal-wallis"
    MANN_WHITNEY_U = "mann-whitney-u"


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: Method

    __test__ = False  # keep pytest from collecting this


def _tie_sum(values):
    _, counts = np.unique(values, return_counts=True)
    counts = counts.astype(float)
    return float(np.sum(counts**3 - counts))


def kruskal_wallis(groups):
    """Kruskal-Wallis H test over a sequence of samples; chi-square p-value."""
    groups = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(groups) < 2:
        raise DataError("Kruskal-Wallis needs at least two groups")
    if any(g.size == 0 for g in groups):
        raise DataError("every group must be nonempty")
    pooled = np.concatenate(groups)
    N = pooled.size
    if N < 3:
        raise DataError("Kruskal-Wallis needs at least three observations")
    ties = _tie_sum(pooled)
    correction = 1.0 - ties / (N**3 - N)
    if correction <= 0:
        return TestResult(0.0, 1.0, Method.KRUSKAL_WALLIS)
    ranks = _sps.rankdata(pooled)
    h, start = 0.0, 0
    for g in groups:
        r = ranks[start : start + g.size].sum()
        h += r * r / g.size
        start += g.size
    h = 12.0 / (N * (N + 1)) * h - 3.0 * (N + 1)
    h = max(h / correction, 0.0)
    p = float(_sps.chi2.sf(h, len(groups) - 1))
    return TestResult(float(h), min(max(p, 0.0), 1.0), Method.KRUSKAL_WALLIS)


def u_statistic(a, b):
    """``U_a``: pairs with a < b counted 1, ties 1/2 (via midranks)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    ranks = _sps.rankdata(np.concatenate([a, b]))
    # rank-sum of b counts, for every b, the a values below it
    return float(ranks[a.size :].sum() - b.size * (b.size + 1) / 2.0)


def mann_whitney_u(a, b):
    """Two-sided Mann-Whitney U test.

    Returns ``U = min(U_a, U_b)`` and a normal-approximation p-value using
    the tie-corrected variance and a 0.5 continuity correction.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise DataError("both samples must be nonempty")
    na, nb = a.size, b.size
    N = na + nb
    u_a = u_statistic(a, b)
    u_b = na * nb - u_a
    mean = na * nb / 2.0
    ties = _tie_sum(np.concatenate([a, b]))
    var = na * nb / 12.0 * ((N + 1) - ties / (N * (N - 1))) if N > 1 else 0.0
    if var <= 0:
        p = 1.0
    else:
        z = max(abs(u_a - mean) - 0.5, 0.0) / math.sqrt(var)
        p = min(1.0, 2.0 * float(_sps.norm.sf(z)))
    return TestResult(float(min(u_a, u_b)), p, Method.MANN_WHITNEY_U)
