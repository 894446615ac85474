"""
精确阈值 S(N)：最小的 M，使 [N, M] 的任意 2-着色都含单色解
每个三元组是一条 not-all-equal 约束，回溯求解器为可信内核
"""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from monosquare.colouring.colouring_io import colouring_to_dict
from monosquare.colouring.colouring_source import BitmapColouring, Interval
from monosquare.config import DEFAULT_CONFIG, MonoSquareConfig
from monosquare.errors import CapacityError, InternalContradictionError, PreconditionError
from monosquare.oracle.brute_force import find_any_solution, solution_patterns

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# 穷举验证的规模上限
EXHAUSTIVE_MAX_ELEMENTS = 22

METHOD_BACKTRACKING = "backtracking"
METHOD_SAT = "external-solver"


@dataclass
class NaeInstance:
    """[N, M] 上全部与颜色无关的三元组"""

    N: int
    M: int
    triples: List[Tuple[int, int, int]]
    exclude_trivial: bool = True

    @property
    def size(self) -> int:
        return self.M - self.N + 1

    @property
    def domain(self) -> Interval:
        return Interval(self.N, self.M)

    def constraints(self) -> List[Tuple[int, ...]]:
        """每个三元组去重后的元素下标（element - N）"""
        return [tuple(sorted({x - self.N, y - self.N, z - self.N})) for x, y, z in self.triples]


def build_instance(N: int, M: int, exclude_trivial: bool = True,
                   max_M: int = DEFAULT_CONFIG.threshold_max_M) -> NaeInstance:
    if N < 1 or N > M:
        raise PreconditionError(f"需要 1 ≤ N ≤ M，当前 N={N}, M={M}")
    if M > max_M:
        raise CapacityError(f"M={M} 超过精确搜索上限 {max_M}")
    triples = list(solution_patterns(N, M, exclude_trivial))
    return NaeInstance(N, M, triples, exclude_trivial)


class NaeBacktracker:
    """
    按元素升序赋值的深度优先搜索
    两个元素同色时第三个被强制取反，冲突即回溯
    """

    def __init__(self, instance: NaeInstance, warm_start: Optional[Sequence[int]] = None,
                 prefix: Sequence[int] = ()):
        self.instance = instance
        self.size = instance.size
        self.cons = instance.constraints()
        self.occ: List[List[int]] = [[] for _ in range(self.size)]
        for cid, members in enumerate(self.cons):
            for v in members:
                self.occ[v].append(cid)
        self.warm = list(warm_start) if warm_start is not None else []
        self.prefix = list(prefix)
        self.assign = [0] * self.size
        self.nodes = 0

    def _preferred(self, var: int) -> int:
        if var < len(self.warm) and self.warm[var]:
            return int(self.warm[var])
        return 1

    def _assign(self, var: int, value: int, trail: List[int]) -> bool:
        """赋值并做单元传播；返回 False 表示冲突"""
        assign = self.assign
        assign[var] = value
        trail.append(var)
        queue = [var]
        while queue:
            v = queue.pop()
            for cid in self.occ[v]:
                free = -1
                n_free = 0
                first = 0
                agree = True
                for u in self.cons[cid]:
                    a = assign[u]
                    if a == 0:
                        n_free += 1
                        free = u
                    elif first == 0:
                        first = a
                    elif a != first:
                        agree = False
                        break
                if not agree:
                    continue
                if n_free == 0:
                    return False
                if n_free == 1 and first != 0:
                    assign[free] = -first
                    trail.append(free)
                    queue.append(free)
        return True

    def _undo(self, trail: List[int], mark: int):
        while len(trail) > mark:
            self.assign[trail.pop()] = 0

    def _next_free(self, start: int) -> Optional[int]:
        for var in range(start, self.size):
            if self.assign[var] == 0:
                return var
        return None

    def solve(self) -> Optional[List[int]]:
        """返回 ±1 颜色列表（下标 element - N），不可满足时返回 None"""
        trail: List[int] = []
        for var, value in enumerate(self.prefix):
            if self.assign[var] == 0:
                self.nodes += 1
                if not self._assign(var, value, trail):
                    return None
            elif self.assign[var] != value:
                return None

        # 决策栈：[变量, trail 标记, 当前取值, 是否已翻转]
        decisions: List[list] = []
        var = self._next_free(len(self.prefix))
        while var is not None:
            # 第一个元素固定为 +1（全局换色对称）
            pinned = var == 0
            value = 1 if pinned else self._preferred(var)
            decisions.append([var, len(trail), value, pinned])
            self.nodes += 1
            ok = self._assign(var, value, trail)
            while not ok:
                while decisions:
                    top = decisions[-1]
                    self._undo(trail, top[1])
                    if top[3]:
                        decisions.pop()
                        continue
                    top[2], top[3] = -top[2], True
                    self.nodes += 1
                    ok = self._assign(top[0], top[2], trail)
                    break
                else:
                    return None
            var = self._next_free(decisions[-1][0] + 1 if decisions else 0)
        return list(self.assign)


def _solve_prefix(instance: NaeInstance, warm_start: Optional[List[int]],
                  prefix: Tuple[int, ...]) -> Tuple[Optional[List[int]], int]:
    solver = NaeBacktracker(instance, warm_start, prefix)
    return solver.solve(), solver.nodes


def _prefixes(depth: int) -> List[Tuple[int, ...]]:
    """首元素固定 +1，其余 depth-1 个元素按 +1 优先的顺序展开"""
    return [(1,) + rest for rest in itertools.product((1, -1), repeat=depth - 1)]


def decide(instance: NaeInstance, warm_start: Optional[Sequence[int]] = None, jobs: int = 1,
           split_depth: int = DEFAULT_CONFIG.split_depth) -> Tuple[Optional[List[int]], int]:
    """返回（颜色列表或 None，搜索节点数）"""
    warm = _normalise(warm_start)
    if jobs <= 1 or instance.size <= split_depth:
        return _solve_prefix(instance, warm, ())

    prefixes = _prefixes(split_depth)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        outcomes = list(pool.map(_solve_prefix, itertools.repeat(instance), itertools.repeat(warm), prefixes))
    nodes = sum(n for _, n in outcomes)
    # 取最靠前的可满足前缀，保证结论与 jobs 无关
    for colours, _ in outcomes:
        if colours is not None:
            return colours, nodes
    return None, nodes


def _normalise(warm_start: Optional[Sequence[int]]) -> Optional[List[int]]:
    if warm_start is None or len(warm_start) == 0:
        return None
    warm = [int(c) for c in warm_start]
    return [-c for c in warm] if warm[0] < 0 else warm


def is_avoidable(instance: NaeInstance, warm_start: Optional[Sequence[int]] = None,
                 jobs: int = 1) -> Optional[BitmapColouring]:
    colours, _ = decide(instance, warm_start, jobs)
    if colours is None:
        return None
    return BitmapColouring.from_colours(instance.domain, colours)


def exhaustive_avoidable(instance: NaeInstance) -> bool:
    """枚举全部 2^|domain| 种着色，回溯求解器的对照"""
    n = instance.size
    if n > EXHAUSTIVE_MAX_ELEMENTS:
        raise CapacityError(f"定义域含 {n} 个元素，超过穷举上限 {EXHAUSTIVE_MAX_ELEMENTS}")
    masks = np.arange(1 << n, dtype=np.int64)
    alive = np.ones(masks.size, dtype=bool)
    for members in instance.constraints():
        bits = [(masks >> v) & 1 for v in members]
        same = np.ones(masks.size, dtype=bool)
        for b in bits[1:]:
            same &= b == bits[0]
        alive &= ~same
        if not alive.any():
            return False
    return True


@dataclass
class ThresholdResult:
    """S(N) 的搜索结果；status 为 found 或 cap_exceeded"""

    N: int
    S: Optional[int]
    witness: Optional[BitmapColouring]
    nodes_explored: int
    method: str
    status: str
    M_cap: int
    exclude_trivial: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "S": self.S,
            "status": self.status,
            "method": self.method,
            "nodes_explored": self.nodes_explored,
            "M_cap": self.M_cap,
            "exclude_trivial": self.exclude_trivial,
            "witness": colouring_to_dict(self.witness) if self.witness is not None else None,
        }


def search_S(N: int, M_cap: int, mode: str = "backtracking", jobs: int = 1,
             exclude_trivial: bool = True, config: MonoSquareConfig = None) -> ThresholdResult:
    """
    M 从 N 开始递增，第一个不可避免的 M 即 S(N)
    每一轮以上一轮的见证着色作为初始偏好
    """
    config = config or DEFAULT_CONFIG
    if N < 1:
        raise PreconditionError(f"N 必须 ≥ 1，当前为 {N}")
    if M_cap < N:
        raise PreconditionError(f"M_cap={M_cap} 小于 N={N}")
    if M_cap > config.threshold_max_M:
        raise CapacityError(f"M_cap={M_cap} 超过精确搜索上限 {config.threshold_max_M}")
    if mode == "sat":
        return _search_sat(N, M_cap, exclude_trivial, config)
    if mode != "backtracking":
        raise PreconditionError(f"未知的搜索模式：{mode}")

    witness: Optional[List[int]] = None
    total = 0
    for M in range(N, M_cap + 1):
        instance = build_instance(N, M, exclude_trivial, config.threshold_max_M)
        colours, nodes = decide(instance, witness, jobs, config.split_depth)
        total += nodes
        if colours is None:
            logger.info("N=%d：[%d, %d] 不可避免，S=%d（共 %d 个节点）", N, N, M, M, total)
            return ThresholdResult(N, M, _retained(N, M - 1, witness), total, METHOD_BACKTRACKING,
                                   "found", M_cap, exclude_trivial)
        logger.debug("M=%d 可避免，节点数 %d", M, nodes)
        witness = colours

    logger.info("N=%d：直到 M_cap=%d 仍可避免", N, M_cap)
    return ThresholdResult(N, None, _retained(N, M_cap, witness), total, METHOD_BACKTRACKING,
                           "cap_exceeded", M_cap, exclude_trivial)


def _retained(N: int, M: int, colours: Optional[List[int]]) -> Optional[BitmapColouring]:
    if colours is None or M < N:
        return None
    witness = BitmapColouring.from_colours(Interval(N, M), colours)
    if find_any_solution(witness) is not None:
        raise InternalContradictionError(f"[{N}, {M}] 的见证着色含单色解")
    return witness


def _search_sat(N: int, M_cap: int, exclude_trivial: bool, config: MonoSquareConfig) -> ThresholdResult:
    from monosquare.threshold.dimacs_export import IncrementalSatSearch

    with IncrementalSatSearch(N, exclude_trivial) as search:
        witness = None
        for M in range(N, M_cap + 1):
            model = search.extend_to(M)
            if model is None:
                logger.info("N=%d：外部求解器判定 [%d, %d] 不可避免，S=%d", N, N, M, M)
                return ThresholdResult(N, M, witness, 0, METHOD_SAT, "found", M_cap, exclude_trivial)
            witness = model
    return ThresholdResult(N, None, witness, 0, METHOD_SAT, "cap_exceeded", M_cap, exclude_trivial)
