from typing import Dict

import numpy as np
import pytest

from monosquare.colouring.colouring_source import (
    Colour,
    ColouringSource,
    Interval,
    make_piecewise,
    piecewise_from_runs,
)
from monosquare.finder.proof_finder import finder_domain


class QueryAuditColouring(ColouringSource):
    """记录所有查询点的范围，用于检查定义域纪律"""

    rule_type = "audit"

    def __init__(self, inner: ColouringSource):
        self.inner = inner
        self.lowest = None
        self.highest = None
        self.queries = 0

    @property
    def domain(self) -> Interval:
        return self.inner.domain

    def _note(self, lo: int, hi: int, count: int):
        assert self.domain.lo <= lo and hi <= self.domain.hi
        self.lowest = lo if self.lowest is None else min(self.lowest, lo)
        self.highest = hi if self.highest is None else max(self.highest, hi)
        self.queries += count

    def _colour(self, n: int) -> int:
        self._note(n, n, 1)
        return int(self.inner.colour_at(n))

    def _colours(self, arr: np.ndarray) -> np.ndarray:
        if arr.size:
            self._note(int(arr.min()), int(arr.max()), int(arr.size))
        return self.inner.colours_at(arr)


def class_threshold_colouring(N: int, k: int, target: int, pinned: Dict[int, int]) -> ColouringSource:
    """
    [N, (k+1)²-N] 上按剩余类取阈值：n ≥ j + a_j(2k+1) 时为 +1
    配对类 j, j' = target - j 满足 a_j + a_j' = (target - j - j')/(2k+1)
    pinned 固定部分 a_j，其余配对由较小的代表元取一半
    """
    modulus = 2 * k + 1
    a: Dict[int, int] = {}
    for j in range(N, N + modulus):
        if j in a:
            continue
        partner = N + (target - j - N) % modulus
        total = (target - j - partner) // modulus
        if j in pinned:
            a[j] = pinned[j]
        elif partner in pinned:
            a[j] = total - pinned[partner]
        elif j <= partner:
            a[j] = total // 2
        else:
            a[j] = total - total // 2
        a[partner] = total - a[j] if partner != j else a[j]

    hi = (k + 1) ** 2 - N
    ns = np.arange(N, hi + 1, dtype=np.int64)
    reps = N + (ns - N) % modulus
    thresholds = reps + np.array([a[j] for j in range(N, N + modulus)], dtype=np.int64)[reps - N] * modulus
    body = piecewise_from_runs(Interval(N, hi), np.where(ns >= thresholds, 1, -1))

    domain = finder_domain(N)
    return make_piecewise(domain, list(body.segments) + [(Interval(hi + 1, domain.hi), Colour.MINUS)])


# ---------- fixtures ----------

@pytest.fixture(scope="session")
def residue_square_colouring():
    """k=153 处反号；两次成对和扫描都无解，c(31) = -1"""
    return class_threshold_colouring(17, 153, 154 ** 2, {153: 0})


@pytest.fixture(scope="session")
def interval_sum_colouring():
    """配对阈值之和恰好等于 k²，f(17) + f(60) = 153²"""
    return class_threshold_colouring(17, 153, 153 ** 2, {153: 0})


@pytest.fixture
def audit():
    return QueryAuditColouring
