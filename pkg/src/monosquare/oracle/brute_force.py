"""
暴力枚举：在可扫描的定义域上枚举并校验 x+y=z² 的单色解
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from monosquare.colouring.colouring_source import Colour, ColouringSource
from monosquare.config import DEFAULT_CONFIG
from monosquare.errors import CapacityError, PreconditionError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# 平凡解 2+2=2²
TRIVIAL_TRIPLE = (2, 2, 2)


@dataclass(frozen=True)
class Solution:
    """单色解 (x, y, z)，约定 x ≤ y"""

    x: int
    y: int
    z: int
    colour: Colour

    @classmethod
    def canonical(cls, a: int, b: int, z: int, colour: Colour) -> "Solution":
        a, b = int(a), int(b)
        return cls(min(a, b), max(a, b), int(z), Colour(colour))

    @property
    def triple(self) -> Tuple[int, int, int]:
        return self.x, self.y, self.z

    @property
    def x_equals_y(self) -> bool:
        return self.x == self.y

    def flipped(self) -> "Solution":
        return Solution(self.x, self.y, self.z, -self.colour)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.x,
            "y": self.y,
            "z": self.z,
            "colour": str(self.colour),
            "x_equals_y": self.x_equals_y,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Solution":
        return cls(int(data["x"]), int(data["y"]), int(data["z"]), Colour.parse(data["colour"]))


@dataclass(frozen=True)
class SolutionCheck:
    """校验结果；reason 为失败原因代码"""

    ok: bool
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def solution_windows(lo: int, hi: int) -> Iterator[Tuple[int, int, int, int]]:
    """
    对每个 z 给出 x 的扫描窗口 [max(lo, z²-hi), z²/2]
    产出 (z, z², x_lo, x_hi)
    """
    z_hi = min(hi, math.isqrt(2 * hi))
    for z in range(lo, z_hi + 1):
        z2 = z * z
        x_lo = max(lo, z2 - hi)
        x_hi = z2 // 2
        if x_lo <= x_hi:
            yield z, z2, x_lo, x_hi


def solution_patterns(lo: int, hi: int, exclude_trivial: bool = True) -> Iterator[Tuple[int, int, int]]:
    """与颜色无关的全部三元组 (x, y, z)，按 (z, x) 排序"""
    for z, z2, x_lo, x_hi in solution_windows(lo, hi):
        for x in range(x_lo, x_hi + 1):
            if exclude_trivial and (x, z2 - x, z) == TRIVIAL_TRIPLE:
                continue
            yield x, z2 - x, z


def _require_scannable(source: ColouringSource, max_domain: int):
    if source.domain.size > max_domain:
        raise CapacityError(
            f"定义域 {source.domain} 含 {source.domain.size} 个元素，超过暴力枚举上限 {max_domain}；"
            f"大定义域请使用 finder"
        )


def enumerate_solutions(
        source: ColouringSource,
        exclude_trivial: bool = True,
        limit: Optional[int] = None,
        max_domain: int = DEFAULT_CONFIG.oracle_max_domain,
) -> List[Solution]:
    """
    枚举全部单色解（x ≤ y），按 (z, x) 字典序，最多 limit 个
    """
    if limit is not None and limit < 1:
        raise PreconditionError(f"limit 必须 ≥ 1，当前为 {limit}")
    _require_scannable(source, max_domain)

    lo, hi = source.domain.lo, source.domain.hi
    colours = source.colours_at(np.arange(lo, hi + 1, dtype=np.int64))

    found: List[Solution] = []
    for z, z2, x_lo, x_hi in solution_windows(lo, hi):
        cz = colours[z - lo]
        xs = np.arange(x_lo, x_hi + 1, dtype=np.int64)
        mask = (colours[xs - lo] == cz) & (colours[z2 - xs - lo] == cz)
        for x in xs[mask]:
            x = int(x)
            if exclude_trivial and (x, z2 - x, z) == TRIVIAL_TRIPLE:
                continue
            found.append(Solution(x, z2 - x, z, Colour(int(cz))))
            if limit is not None and len(found) >= limit:
                logger.debug("达到 limit=%d，提前结束枚举", limit)
                return found

    logger.debug("定义域 %s 上共枚举到 %d 个单色解", source.domain, len(found))
    return found


def find_any_solution(source: ColouringSource, exclude_trivial: bool = True,
                      max_domain: int = DEFAULT_CONFIG.oracle_max_domain) -> Optional[Solution]:
    """按 (z, x) 顺序返回第一个单色解，没有则返回 None"""
    found = enumerate_solutions(source, exclude_trivial=exclude_trivial, limit=1, max_domain=max_domain)
    return found[0] if found else None


def verify_solution(source: ColouringSource, s: Solution, exclude_trivial: bool = True) -> SolutionCheck:
    """证书校验：不抛异常，失败时给出原因代码"""
    if s.x + s.y != s.z * s.z:
        return SolutionCheck(False, "equation")
    if s.x > s.y:
        return SolutionCheck(False, "order")
    if any(v not in source.domain for v in s.triple):
        return SolutionCheck(False, "domain")
    if exclude_trivial and s.triple == TRIVIAL_TRIPLE:
        return SolutionCheck(False, "trivial")
    if any(source.colour_at(v) != s.colour for v in s.triple):
        return SolutionCheck(False, "colour")
    return SolutionCheck(True)
