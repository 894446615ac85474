"""
着色源：颜色、整数区间以及惰性、不可变的 2-着色规则
"""
import bisect
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import ClassVar, List, Sequence, Tuple

import numpy as np

from monosquare.config import DEFAULT_CONFIG
from monosquare.errors import ArithmeticOverflowError, ConstructionError, DomainError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

U64_MAX = (1 << 64) - 1
# 区间上界：保证内部的平方与求和不会超出 64 位
MAX_ELEMENT = 1 << 62


def checked_mul(a: int, b: int) -> int:
    result = a * b
    if result < 0 or result > U64_MAX:
        raise ArithmeticOverflowError(f"{a} * {b} 超出64位无符号范围")
    return result


def checked_square(a: int) -> int:
    return checked_mul(a, a)


class Colour(IntEnum):
    """两种颜色，对应取值 {-1, +1}"""

    PLUS = 1
    MINUS = -1

    def __neg__(self) -> "Colour":
        return Colour(-int(self))

    def __str__(self) -> str:
        return "+1" if self is Colour.PLUS else "-1"

    @classmethod
    def parse(cls, text: str) -> "Colour":
        text = str(text).strip()
        if text in ("+1", "1", "+"):
            return cls.PLUS
        if text in ("-1", "-"):
            return cls.MINUS
        raise ValueError(f"无法识别的颜色：{text!r}（应为 \"+1\" 或 \"-1\"）")


@dataclass(frozen=True)
class Interval:
    """整数闭区间 [lo, hi]"""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1:
            raise ConstructionError(f"区间下界必须 ≥ 1，当前为 {self.lo}", self.lo)
        if self.hi < self.lo:
            raise ConstructionError(f"区间 [{self.lo}, {self.hi}] 为空", self.hi)
        if self.hi > MAX_ELEMENT:
            raise ArithmeticOverflowError(f"区间上界 {self.hi} 超过 2^62")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, n: int) -> bool:
        return self.lo <= n <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


class ColouringSource(ABC):
    """
    着色源基类
    所有子类构造后不可变，可被多线程并发读取
    """

    rule_type: ClassVar[str] = ""
    domain: Interval

    def colour_at(self, n: int) -> Colour:
        """单点取色"""
        n = int(n)
        if n not in self.domain:
            raise DomainError(n, self.domain.lo, self.domain.hi)
        return Colour(self._colour(n))

    def colours_at(self, ns) -> np.ndarray:
        """批量取色，返回由 ±1 组成的 int8 数组"""
        arr = np.asarray(ns, dtype=np.int64)
        if arr.size:
            lo, hi = int(arr.min()), int(arr.max())
            if lo < self.domain.lo:
                raise DomainError(lo, self.domain.lo, self.domain.hi)
            if hi > self.domain.hi:
                raise DomainError(hi, self.domain.lo, self.domain.hi)
        return self._colours(arr)

    def with_domain(self, domain: Interval) -> "ColouringSource":
        """把规则限制到（或对无界规则而言：迁移到）新的定义域"""
        raise ConstructionError(f"{self.rule_type} 着色不支持更换定义域")

    @abstractmethod
    def _colour(self, n: int) -> int:
        ...

    @abstractmethod
    def _colours(self, arr: np.ndarray) -> np.ndarray:
        ...


@dataclass(frozen=True)
class PiecewiseColouring(ColouringSource):
    """分段着色：有序区间段恰好铺满定义域"""

    rule_type: ClassVar[str] = "piecewise"

    domain: Interval
    segments: Tuple[Tuple[Interval, Colour], ...]
    _starts: np.ndarray = field(init=False, repr=False, compare=False)
    _values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_tiling(self.domain, self.segments)
        object.__setattr__(self, "_starts", np.array([seg.lo for seg, _ in self.segments], dtype=np.int64))
        object.__setattr__(self, "_values", np.array([int(c) for _, c in self.segments], dtype=np.int8))

    def _colour(self, n: int) -> int:
        idx = bisect.bisect_right(self._starts, n) - 1
        return int(self._values[idx])

    def _colours(self, arr: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._starts, arr, side="right") - 1
        return self._values[idx]

    def with_domain(self, domain: Interval) -> "PiecewiseColouring":
        if not self.domain.contains_interval(domain):
            raise ConstructionError(f"{domain} 不是 {self.domain} 的子区间")
        clipped = []
        for seg, colour in self.segments:
            lo, hi = max(seg.lo, domain.lo), min(seg.hi, domain.hi)
            if lo <= hi:
                clipped.append((Interval(lo, hi), colour))
        return PiecewiseColouring(domain, tuple(clipped))


@dataclass(frozen=True)
class PeriodicColouring(ColouringSource):
    """周期着色：colour(n) = pattern[(n - anchor) mod period]"""

    rule_type: ClassVar[str] = "periodic"

    domain: Interval
    period: int
    pattern: Tuple[Colour, ...]
    anchor: int
    _values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.period < 1:
            raise ConstructionError(f"周期必须 ≥ 1，当前为 {self.period}")
        if len(self.pattern) != self.period:
            raise ConstructionError(f"pattern 长度 {len(self.pattern)} 与周期 {self.period} 不一致")
        object.__setattr__(self, "_values", np.array([int(c) for c in self.pattern], dtype=np.int8))

    def _colour(self, n: int) -> int:
        return int(self._values[(n - self.anchor) % self.period])

    def _colours(self, arr: np.ndarray) -> np.ndarray:
        return self._values[(arr - self.anchor) % self.period]

    def with_domain(self, domain: Interval) -> "PeriodicColouring":
        return PeriodicColouring(domain, self.period, self.pattern, self.anchor)


@dataclass(frozen=True)
class BitmapColouring(ColouringSource):
    """
    位图着色：第 i 位表示 offset+i 的颜色（1 ↦ +1），字节内小端序
    """

    rule_type: ClassVar[str] = "bitmap"

    domain: Interval
    offset: int
    bits: bytes
    _unpacked: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        size = self.domain.size
        if size > DEFAULT_CONFIG.bitmap_max_domain:
            raise ConstructionError(
                f"位图定义域包含 {size} 个元素，超过上限 {DEFAULT_CONFIG.bitmap_max_domain}，请改用惰性规则"
            )
        if self.offset != self.domain.lo:
            raise ConstructionError(f"位图 offset={self.offset} 必须等于定义域下界 {self.domain.lo}", self.offset)
        expected = (size + 7) // 8
        if len(self.bits) != expected:
            raise ConstructionError(f"位图长度 {len(self.bits)} 字节，定义域需要 {expected} 字节")
        unpacked = np.unpackbits(np.frombuffer(self.bits, dtype=np.uint8), bitorder="little")[:size]
        object.__setattr__(self, "_unpacked", unpacked)

    @classmethod
    def from_colours(cls, domain: Interval, colours: Sequence[int]) -> "BitmapColouring":
        values = np.asarray(colours, dtype=np.int8)
        if values.size != domain.size:
            raise ConstructionError(f"颜色数 {values.size} 与定义域大小 {domain.size} 不一致")
        packed = np.packbits((values > 0).astype(np.uint8), bitorder="little")
        return cls(domain, domain.lo, packed.tobytes())

    def _colour(self, n: int) -> int:
        return 1 if self._unpacked[n - self.offset] else -1

    def _colours(self, arr: np.ndarray) -> np.ndarray:
        bits = self._unpacked[arr - self.offset]
        return (bits.astype(np.int8) * 2 - 1).astype(np.int8)

    def with_domain(self, domain: Interval) -> "BitmapColouring":
        if not self.domain.contains_interval(domain):
            raise ConstructionError(f"{domain} 不是 {self.domain} 的子区间")
        return BitmapColouring.from_colours(domain, self._colours(np.arange(domain.lo, domain.hi + 1)))


_GAMMA = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    """splitmix64 的输出函数"""
    z = (z + _GAMMA) & U64_MAX
    z = ((z ^ (z >> 30)) * _MIX_1) & U64_MAX
    z = ((z ^ (z >> 27)) * _MIX_2) & U64_MAX
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_2)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class RandomColouring(ColouringSource):
    """
    种子随机着色：n 的颜色是 (seed, n) 的纯函数（计数器模式哈希）
    与访问顺序无关，可以在任意点随机访问
    """

    rule_type: ClassVar[str] = "random"

    domain: Interval
    seed: int

    def __post_init__(self):
        if not 0 <= self.seed <= U64_MAX:
            raise ConstructionError(f"种子必须是64位无符号整数，当前为 {self.seed}")

    @cached_property
    def _key(self) -> int:
        return _mix64(self.seed)

    def _colour(self, n: int) -> int:
        return 1 if _mix64((self._key + n) & U64_MAX) >> 63 else -1

    def _colours(self, arr: np.ndarray) -> np.ndarray:
        h = _mix64_array(arr.astype(np.uint64) + np.uint64(self._key))
        return np.where((h >> np.uint64(63)) == 1, 1, -1).astype(np.int8)

    def with_domain(self, domain: Interval) -> "RandomColouring":
        return RandomColouring(domain, self.seed)


@dataclass(frozen=True)
class FlippedColouring(ColouringSource):
    """颜色取反"""

    rule_type: ClassVar[str] = "flip"

    inner: ColouringSource

    @property
    def domain(self) -> Interval:
        return self.inner.domain

    def _colour(self, n: int) -> int:
        return -self.inner._colour(n)

    def _colours(self, arr: np.ndarray) -> np.ndarray:
        return -self.inner.colours_at(arr)

    def with_domain(self, domain: Interval) -> "FlippedColouring":
        return FlippedColouring(self.inner.with_domain(domain))


def _check_tiling(domain: Interval, segments: Sequence[Tuple[Interval, Colour]]):
    """检查分段是否不重叠、连续并恰好覆盖定义域"""
    if not segments:
        raise ConstructionError(f"{domain} 上没有任何分段，缺口位于 {domain.lo}", domain.lo)
    expected = domain.lo
    for seg, colour in segments:
        if not isinstance(colour, Colour):
            raise ConstructionError(f"分段 {seg} 的颜色 {colour!r} 非法", seg.lo)
        if seg.lo < domain.lo:
            raise ConstructionError(f"分段 {seg} 越出定义域 {domain}，越界点 {seg.lo}", seg.lo)
        if seg.lo > expected:
            raise ConstructionError(f"分段之间存在缺口，位于 {expected}", expected)
        if seg.lo < expected:
            raise ConstructionError(f"分段重叠，位于 {seg.lo}", seg.lo)
        expected = seg.hi + 1
    if expected - 1 > domain.hi:
        raise ConstructionError(f"分段越出定义域 {domain}，越界点 {domain.hi + 1}", domain.hi + 1)
    if expected - 1 < domain.hi:
        raise ConstructionError(f"分段之间存在缺口，位于 {expected}", expected)


def make_piecewise(domain: Interval, segments: Sequence[Tuple[Interval, Colour]]) -> PiecewiseColouring:
    """构造并校验分段着色"""
    return PiecewiseColouring(domain, tuple((seg, Colour(c)) for seg, c in segments))


def constant_colouring(domain: Interval, colour: Colour) -> PiecewiseColouring:
    return PiecewiseColouring(domain, ((domain, Colour(colour)),))


def piecewise_from_runs(domain: Interval, colours: Sequence[int]) -> PiecewiseColouring:
    """把逐点颜色序列压缩成分段着色"""
    values = np.asarray(colours, dtype=np.int8)
    if values.size != domain.size:
        raise ConstructionError(f"颜色数 {values.size} 与定义域大小 {domain.size} 不一致")
    cuts = np.flatnonzero(np.diff(values)) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts - 1, [values.size - 1]))
    segments: List[Tuple[Interval, Colour]] = [
        (Interval(domain.lo + int(s), domain.lo + int(e)), Colour(int(values[s])))
        for s, e in zip(starts, ends)
    ]
    return PiecewiseColouring(domain, tuple(segments))
