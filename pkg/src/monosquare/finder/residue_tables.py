"""
模 2k+1 剩余类表：每个剩余类 H_j 的顶端、断点 f(j) 与 g(j)
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from monosquare.colouring.colouring_source import ColouringSource
from monosquare.errors import InternalContradictionError, PreconditionError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# f(j) = ∞ 的哨兵值
NO_BREAK = np.iinfo(np.int64).max


def k_square_residue(k: int) -> int:
    """k² mod (2k+1)；偶数 k 时等于 3k/2+1，奇数 k 时等于 (k+1)/2"""
    if k < 1:
        raise PreconditionError(f"k 必须 ≥ 1，当前为 {k}")
    return (k * k) % (2 * k + 1)


def m_range(k: int):
    """[⌈0.2k⌉, ⌊0.8k⌋]"""
    return -(-k // 5), (4 * k) // 5


def align_up(value: int, residue: int, modulus: int) -> int:
    """不小于 value 且与 residue 同余的最小整数"""
    return value + (residue - value) % modulus


def class_tops(N: int, k: int) -> np.ndarray:
    """各代表元 j∈[N, N+2k] 的类顶端 j + m_j(2k+1)，m_j 为满足 j+(m_j-1)(2k+1) ≤ k²-N 的最大整数"""
    modulus = 2 * k + 1
    if k * k - 2 * k < 2 * N:
        raise PreconditionError(f"k={k} 太小：代表元 [N, N+2k] 超出 [N, k²-N]")
    reps = np.arange(N, N + modulus, dtype=np.int64)
    steps = (k * k - N - reps) // modulus + 1
    return reps + steps * modulus


def class_top(N: int, k: int, j: int) -> int:
    modulus = 2 * k + 1
    rep = N + (j - N) % modulus
    return rep + ((k * k - N - rep) // modulus + 1) * modulus


@dataclass(frozen=True, eq=False)
class ResidueTable:
    """
    剩余类表
    数组以 j - N 为下标，breaks 中 NO_BREAK 表示 f(j) = ∞
    """

    N: int
    k: int
    tops: np.ndarray
    breaks: np.ndarray

    @property
    def modulus(self) -> int:
        return 2 * self.k + 1

    @cached_property
    def representatives(self) -> np.ndarray:
        return np.arange(self.N, self.N + self.modulus, dtype=np.int64)

    @cached_property
    def finite(self) -> np.ndarray:
        return self.breaks != NO_BREAK

    @cached_property
    def g_values(self) -> np.ndarray:
        return np.where(self.finite, self.breaks - self.modulus, self.tops)

    @cached_property
    def in_A(self) -> np.ndarray:
        """A = {j : 2f(j) ≥ (k+1)²}，∞ 属于 A"""
        safe = np.where(self.finite, self.breaks, 0)
        return ~self.finite | (2 * safe >= (self.k + 1) ** 2)

    def index_of(self, n) -> np.ndarray:
        return (np.asarray(n, dtype=np.int64) - self.N) % self.modulus

    def rep_of(self, n: int) -> int:
        return self.N + (int(n) - self.N) % self.modulus

    def f(self, j: int) -> Optional[int]:
        """断点；None 表示 ∞"""
        value = int(self.breaks[self.rep_of(j) - self.N])
        return None if value == NO_BREAK else value

    def g(self, j: int) -> int:
        return int(self.g_values[self.rep_of(j) - self.N])

    def top(self, j: int) -> int:
        return int(self.tops[self.rep_of(j) - self.N])


def build_residue_tables(source: ColouringSource, N: int, k: int) -> ResidueTable:
    """
    对每个剩余类二分查找断点（各类同时进行）
    前提：两次成对和扫描都没有找到解，此时每个类上的颜色是单调的
    断点两侧的相邻元素会被再次检查，单调性被破坏时抛出 InternalContradictionError
    """
    modulus = 2 * k + 1
    tops = class_tops(N, k)
    reps = np.arange(N, N + modulus, dtype=np.int64)
    last = (tops - reps) // modulus

    lo = np.zeros(modulus, dtype=np.int64)
    hi = last + 1
    active = lo < hi
    while active.any():
        idx = np.flatnonzero(active)
        mid = (lo[idx] + hi[idx]) // 2
        plus = source.colours_at(reps[idx] + mid * modulus) > 0
        hi[idx[plus]] = mid[plus]
        lo[idx[~plus]] = mid[~plus] + 1
        active = lo < hi

    has_break = lo <= last
    at = np.flatnonzero(has_break)
    if at.size:
        colours = source.colours_at(reps[at] + lo[at] * modulus)
        bad = at[colours < 0]
        if bad.size:
            _raise_violation(reps, bad[0], "断点处颜色不是 +1")
    below = np.flatnonzero(lo >= 1)
    if below.size:
        colours = source.colours_at(reps[below] + (lo[below] - 1) * modulus)
        bad = below[colours > 0]
        if bad.size:
            _raise_violation(reps, bad[0], "断点下方出现 +1")

    breaks = np.where(has_break, reps + lo * modulus, NO_BREAK)
    logger.info("k=%d 的剩余类表构建完成：%d 个类，其中 %d 个全为 -1", k, modulus, int((~has_break).sum()))
    return ResidueTable(N=N, k=k, tops=tops, breaks=breaks)


def _raise_violation(reps: np.ndarray, index: int, what: str):
    raise InternalContradictionError(f"剩余类 H_{int(reps[index])} 单调性被破坏：{what}")


def linear_breaks(source: ColouringSource, N: int, k: int) -> np.ndarray:
    """逐类线性扫描求断点，二分查找的对照"""
    modulus = 2 * k + 1
    tops = class_tops(N, k)
    breaks = np.full(modulus, NO_BREAK, dtype=np.int64)
    for idx, top in enumerate(tops):
        members = np.arange(N + idx, int(top) + 1, modulus, dtype=np.int64)
        plus = np.flatnonzero(source.colours_at(members) > 0)
        if plus.size:
            breaks[idx] = members[plus[0]]
    return breaks


def certify_monotone_classes(source: ColouringSource, N: int, k: int,
                             sample: int = 1000, seed: int = 0, chunk: int = 1 << 16) -> int:
    """
    统计违反 c(n) ≤ c(n+2k+1) 的相邻对数量（n ∈ [N, k²-N]）
    k ≤ 1000 时穷举，否则按 seed 抽样 sample 对
    """
    modulus = 2 * k + 1
    upper = k * k - N
    if upper < N:
        return 0
    violations = 0
    if k <= 1000:
        for start in range(N, upper + 1, chunk):
            ns = np.arange(start, min(upper, start + chunk - 1) + 1, dtype=np.int64)
            violations += int(((source.colours_at(ns) > 0) & (source.colours_at(ns + modulus) < 0)).sum())
    else:
        ns = np.random.default_rng(seed).integers(N, upper + 1, size=sample, dtype=np.int64)
        violations = int(((source.colours_at(ns) > 0) & (source.colours_at(ns + modulus) < 0)).sum())
    if violations:
        logger.warning("k=%d 的剩余类单调性检查发现 %d 处违例", k, violations)
    return violations
