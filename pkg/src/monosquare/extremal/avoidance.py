"""
无单色解的两段着色
[N, split] 染 +1，(split, top] 染 -1：
+1 段内 x+y ≤ 2·split < N² ≤ z²，-1 段内 x+y ≤ 2·top < (split+1)² ≤ z²
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

from monosquare.colouring.colouring_source import Colour, Interval, PiecewiseColouring, make_piecewise
from monosquare.config import DEFAULT_CONFIG, MonoSquareConfig
from monosquare.errors import CapacityError, PreconditionError
from monosquare.oracle.brute_force import find_any_solution

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


@dataclass(frozen=True)
class BandLayout:
    """两段着色的参数"""

    N: int
    split: int
    top: int

    def __post_init__(self):
        if self.N < 3:
            raise PreconditionError(f"N={self.N} 太小，两段着色要求 N ≥ 3")
        if self.split < self.N or self.top < self.N:
            raise PreconditionError(f"分段 split={self.split}, top={self.top} 落在 N={self.N} 之下")

    @classmethod
    def thirds(cls, N: int) -> "BandLayout":
        """split = ⌊N²/3⌋，top = ⌊N⁴/27⌋"""
        if N < 3:
            raise PreconditionError(f"N={N} 太小，两段着色要求 N ≥ 3")
        return cls(N, N * N // 3, N ** 4 // 27)

    @classmethod
    def tight(cls, N: int) -> "BandLayout":
        """满足 2·split < N² 与 2·top < (split+1)² 的最大 split 与 top"""
        if N < 3:
            raise PreconditionError(f"N={N} 太小，两段着色要求 N ≥ 3")
        split = (N * N - 1) // 2
        return cls(N, split, ((split + 1) ** 2 - 1) // 2)

    @property
    def single_band(self) -> bool:
        return self.split >= self.top

    @property
    def certified(self) -> bool:
        """整数形式的两条不等式"""
        if self.single_band:
            return 2 * self.top < self.N * self.N
        return 2 * self.split < self.N * self.N and 2 * self.top < (self.split + 1) ** 2

    def to_dict(self) -> Dict[str, Any]:
        return {"N": self.N, "split": self.split, "top": self.top}


def two_band_colouring(N: int, split: int, top: int) -> PiecewiseColouring:
    """split ≥ top 时退化为单段 +1"""
    layout = BandLayout(N, split, top)
    return _colouring_of(layout)


def _colouring_of(layout: BandLayout) -> PiecewiseColouring:
    domain = Interval(layout.N, layout.top)
    if layout.single_band:
        return make_piecewise(domain, [(domain, Colour.PLUS)])
    return make_piecewise(domain, [
        (Interval(layout.N, layout.split), Colour.PLUS),
        (Interval(layout.split + 1, layout.top), Colour.MINUS),
    ])


def avoidance_colouring(N: int) -> PiecewiseColouring:
    layout = BandLayout.thirds(N)
    logger.info("N=%d 的两段着色：+1 于 [%d, %d]，-1 于 (%d, %d]", N, N, layout.split, layout.split, layout.top)
    return _colouring_of(layout)


def tight_two_band(N: int) -> BandLayout:
    return BandLayout.tight(N)


def verify_avoidance(N: int, bands: str = "thirds", config: MonoSquareConfig = None) -> bool:
    """用暴力枚举确认两段着色没有单色解"""
    config = config or DEFAULT_CONFIG
    layout = BandLayout.tight(N) if bands == "tight" else BandLayout.thirds(N)
    size = layout.top - layout.N + 1
    if size > config.oracle_max_domain:
        raise CapacityError(f"N={N} 的定义域含 {size} 个元素，超过暴力枚举上限 {config.oracle_max_domain}")
    solution = find_any_solution(_colouring_of(layout), max_domain=config.oracle_max_domain)
    if solution is not None:
        logger.warning("N=%d 的两段着色出现单色解 %s", N, solution.triple)
    return solution is None


def band_certificates(N_lo: int, N_hi: int) -> Optional[int]:
    """在 [N_lo, N_hi] 上检查整数不等式，返回第一个不成立的 N"""
    for N in range(max(3, N_lo), N_hi + 1):
        if not BandLayout.thirds(N).certified:
            return N
    return None
