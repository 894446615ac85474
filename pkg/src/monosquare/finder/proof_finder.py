"""
构造性求解模块
把"[N, 10⁴N⁴] 的任意 2-着色都有单色解"的证明逐步执行为确定性算法，
返回单色解以及可以重放校验的证明轨迹
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Callable, ClassVar, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from monosquare.colouring.colouring_source import (
    Colour,
    ColouringSource,
    FlippedColouring,
    Interval,
    checked_mul,
    checked_square,
)
from monosquare.config import DEFAULT_CONFIG, MonoSquareConfig
from monosquare.errors import (
    ArithmeticOverflowError,
    DomainError,
    InternalContradictionError,
    PreconditionError,
)
from monosquare.finder.residue_tables import (
    ResidueTable,
    align_up,
    build_residue_tables,
    certify_monotone_classes,
    class_top,
    k_square_residue,
    m_range,
)
from monosquare.oracle.brute_force import Solution, SolutionCheck, verify_solution

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# 经不等式审计得到的最小有效 N
MIN_VALID_N = 17


def min_valid_N() -> int:
    return MIN_VALID_N


def finder_domain(N: int) -> Interval:
    """[N, 10⁴N⁴]，使用检查运算"""
    return Interval(N, checked_mul(10 ** 4, checked_square(checked_square(N))))


def audit_inequalities(N: int, window: int = 1000) -> Dict[str, bool]:
    """
    逐项检查证明用到的不等式，k 取 [9N, min(80N²-1, 9N+window)] 中的每个值
    """
    k_lo, k_hi = 9 * N, min(80 * N * N - 1, 9 * N + window)
    ks = range(k_lo, k_hi + 1)
    hi = 10 ** 4 * N ** 4

    def summands_in_range(k: int) -> bool:
        r = k_square_residue(k)
        lo, top = m_range(k)
        return lo <= r // 2 <= top and lo <= r - r // 2 <= top

    return {
        "band_in_range": N * N >= 9 * N and 80 * N * N <= hi,
        "boundary_window_nonempty": k_lo <= k_hi,
        "square_dominates_linear": all(150 * k < k * k for k in ks),
        "m_range_above_N": all(m_range(k)[0] >= N for k in ks),
        "classes_fit": all(k * k - 2 * k >= 2 * N for k in ks),
        "residue_sum_below_m_squared": all(2 * (N + 2 * k) <= m_range(k)[0] ** 2 for k in ks),
        "g_sum_above_m_squared": all(m_range(k)[1] ** 2 <= k * k - 2 * k - 1 for k in ks),
        "final_k_summands": all(summands_in_range(k) for k in ks),
        "queries_in_domain": (80 * N * N) ** 2 - N <= hi,
    }


# ---------- 证明分支 ----------

@dataclass(frozen=True)
class MonochromaticBand:
    tag: ClassVar[str] = "monochromatic_band"
    band_colour: Colour


@dataclass(frozen=True)
class PairSumAtK:
    tag: ClassVar[str] = "pair_sum_k"
    k: int
    i: int


@dataclass(frozen=True)
class PairSumAtKPlus1:
    tag: ClassVar[str] = "pair_sum_k_plus_1"
    k: int
    i: int


@dataclass(frozen=True)
class IntervalSum:
    tag: ClassVar[str] = "interval_sum"
    k: int
    j: int


@dataclass(frozen=True)
class ResidueSquare:
    tag: ClassVar[str] = "residue_square"
    k: int
    m: int
    j1: int
    j2: int


@dataclass(frozen=True)
class FinalK:
    tag: ClassVar[str] = "final_k"
    k: int
    u: int
    v: int


ProofCase = Union[MonochromaticBand, PairSumAtK, PairSumAtKPlus1, IntervalSum, ResidueSquare, FinalK]
CASE_TYPES = {cls.tag: cls for cls in (MonochromaticBand, PairSumAtK, PairSumAtKPlus1, IntervalSum, ResidueSquare, FinalK)}


def case_to_dict(case: ProofCase) -> Dict[str, Any]:
    fields = {key: (str(value) if isinstance(value, Colour) else value) for key, value in asdict(case).items()}
    return {"tag": case.tag, **fields}


def case_from_dict(data: Dict[str, Any]) -> ProofCase:
    data = dict(data)
    tag = data.pop("tag")
    if tag not in CASE_TYPES:
        raise ValueError(f"未知的证明分支：{tag}")
    if tag == MonochromaticBand.tag:
        return MonochromaticBand(Colour.parse(data["band_colour"]))
    return CASE_TYPES[tag](**{key: int(value) for key, value in data.items()})


@dataclass(frozen=True)
class ProofTrace:
    """证明轨迹：flipped 表示是否交换过颜色，solution 使用原始颜色"""

    flipped: bool
    case: ProofCase
    solution: Solution

    def to_dict(self) -> Dict[str, Any]:
        return {"flipped": self.flipped, "case": case_to_dict(self.case), "solution": self.solution.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProofTrace":
        return cls(bool(data["flipped"]), case_from_dict(data["case"]), Solution.from_dict(data["solution"]))


class CaseWitness(NamedTuple):
    """某个证明分支给出的解（在归一化颜色下）"""

    solution: Solution
    case: ProofCase


class ProofFinderModule:
    """构造性求解模块"""

    def __init__(self, config: MonoSquareConfig = None):
        self.config = config or DEFAULT_CONFIG

    def _first_match(self, lo: int, hi: int, evaluate: Callable[[np.ndarray], np.ndarray]) -> Optional[int]:
        """
        在 [lo, hi] 中找第一个满足条件的整数
        分块向量化求值，块大小从 scan_chunk_min 起翻倍直到 scan_chunk_max
        """
        size = self.config.scan_chunk_min
        start = lo
        while start <= hi:
            end = min(hi, start + size - 1)
            idx = np.arange(start, end + 1, dtype=np.int64)
            hits = np.flatnonzero(evaluate(idx))
            if hits.size:
                return int(idx[hits[0]])
            start = end + 1
            size = min(size * 2, self.config.scan_chunk_max)
        return None

    def find_boundary_k(self, source: ColouringSource, N: int) -> Optional[int]:
        """[9N, 80N²-1] 中最小的 k，使 c(k) ≠ c(k+1)"""
        self._require_N(N)

        def differs(idx: np.ndarray) -> np.ndarray:
            colours = source.colours_at(np.arange(idx[0], idx[-1] + 2, dtype=np.int64))
            return colours[:-1] != colours[1:]

        k = self._first_match(9 * N, 80 * N * N - 1, differs)
        if k is None:
            logger.info("[%d, %d] 同色，进入单色带分支", 9 * N, 80 * N * N)
        else:
            logger.info("找到边界点 k=%d", k)
        return k

    def scan_pair_sum(self, source: ColouringSource, target: int, wanted: Colour,
                      lo: int, hi: int) -> Optional[Tuple[int, int]]:
        """
        找最小的 i ∈ [lo, ⌊target/2⌋]，使 c(i) = c(target-i) = wanted
        返回 None 即证明了对应不等式在整个范围内成立
        """
        if lo > hi:
            raise PreconditionError(f"扫描区间 [{lo}, {hi}] 为空")
        upper = min(hi, target // 2)
        if upper < lo:
            return None
        domain = source.domain
        for point in (lo, upper, target - lo, target - upper):
            if point not in domain:
                raise DomainError(point, domain.lo, domain.hi)

        w = int(wanted)

        def both_wanted(idx: np.ndarray) -> np.ndarray:
            return (source.colours_at(idx) == w) & (source.colours_at(target - idx) == w)

        i = self._first_match(lo, upper, both_wanted)
        return None if i is None else (i, target - i)

    def build_residue_tables(self, source: ColouringSource, N: int, k: int) -> ResidueTable:
        return build_residue_tables(source, N, k)

    def interval_sum_witness(self, source: ColouringSource, tables: ResidueTable,
                             N: int, k: int) -> Optional[CaseWitness]:
        """存在 j 使 f(j) + f(k²-j) ≤ k² 时，取 x = f(j), y = k² - x, z = k（颜色 +1）"""
        k2 = k * k
        partner = tables.index_of(k2 - tables.representatives)
        both = tables.finite & tables.finite[partner]
        safe = np.where(tables.finite, tables.breaks, 0)
        ok = both & (safe + safe[partner] <= k2)
        hits = np.flatnonzero(ok)
        if not hits.size:
            return None
        j = int(tables.representatives[hits[0]])
        x = tables.f(j)
        logger.info("区间和分支：j=%d, f(j)=%d", j, x)
        return CaseWitness(Solution.canonical(x, k2 - x, k, Colour.PLUS), IntervalSum(k, j))

    def residue_square_witness(self, source: ColouringSource, tables: ResidueTable,
                               N: int, k: int, m: int) -> Optional[CaseWitness]:
        """
        m ∈ [⌈0.2k⌉, ⌊0.8k⌋]：若 c(m) = -1，则 m² 可写成两个 -1 元素之和
        c(m) = +1 时返回 None
        """
        m_lo, m_hi = m_range(k)
        if not m_lo <= m <= m_hi:
            raise PreconditionError(f"m={m} 不在 [{m_lo}, {m_hi}] 内")
        if source.colour_at(m) != Colour.MINUS:
            return None

        m2 = m * m
        partner = tables.index_of(m2 - tables.representatives)
        ok = tables.in_A & tables.in_A[partner]
        hits = np.flatnonzero(ok)
        if not hits.size:
            raise InternalContradictionError(
                f"A+A 没有覆盖 m²={m2} 的剩余类（|A|={int(tables.in_A.sum())}，应 ≥ {k + 1}）"
            )
        j1 = int(tables.representatives[hits[0]])
        j2 = int(tables.representatives[partner[hits[0]]])
        x, y = _residue_square_pair(tables, m, j1, j2)
        if x > tables.g(j1) or y < j2:
            raise InternalContradictionError(f"m={m} 的分解 ({x}, {y}) 超出 -1 区段")
        logger.info("剩余平方分支：m=%d, j1=%d, j2=%d", m, j1, j2)
        return CaseWitness(Solution.canonical(x, y, m, Colour.MINUS), ResidueSquare(k, m, j1, j2))

    def final_k_witness(self, source: ColouringSource, tables: ResidueTable,
                        N: int, k: int) -> CaseWitness:
        """
        [⌈0.2k⌉, ⌊0.8k⌋] 全为 +1 时：k² 的剩余拆成 u = ⌊r/2⌋ 与 v = r - u，给出 z = k 的解
        """
        r = k_square_residue(k)
        u, v = r // 2, r - r // 2
        m_lo, m_hi = m_range(k)
        if not (m_lo <= u <= m_hi and m_lo <= v <= m_hi):
            raise InternalContradictionError(f"k={k}：u={u}, v={v} 不在 [{m_lo}, {m_hi}] 内")
        x, y = _final_k_pair(N, k, u, v)
        logger.info("末分支：k=%d, u=%d, v=%d", k, u, v)
        return CaseWitness(Solution.canonical(x, y, k, Colour.PLUS), FinalK(k, u, v))

    def _dispatch(self, work: ColouringSource, N: int, k: int) -> CaseWitness:
        """在归一化着色（c(k)=+1, c(k+1)=-1）上依次执行各分支"""
        k2, k1 = k * k, (k + 1) * (k + 1)

        hit = self.scan_pair_sum(work, k2, Colour.PLUS, N, k2 - N)
        if hit:
            return CaseWitness(Solution.canonical(hit[0], hit[1], k, Colour.PLUS), PairSumAtK(k, hit[0]))

        hit = self.scan_pair_sum(work, k1, Colour.MINUS, N, k1 - N)
        if hit:
            return CaseWitness(Solution.canonical(hit[0], hit[1], k + 1, Colour.MINUS), PairSumAtKPlus1(k, hit[0]))

        logger.info("k=%d 的两次成对和扫描均无解，剩余类上颜色单调", k)
        tables = self.build_residue_tables(work, N, k)
        if self.config.audit_monotonicity:
            violations = certify_monotone_classes(work, N, k, sample=self.config.monotone_sample)
            if violations:
                raise InternalContradictionError(f"k={k} 的剩余类单调性检查失败：{violations} 处违例")

        witness = self.interval_sum_witness(work, tables, N, k)
        if witness:
            return witness

        m_lo, m_hi = m_range(k)
        for m in range(m_lo, m_hi + 1):
            witness = self.residue_square_witness(work, tables, N, k, m)
            if witness:
                return witness

        return self.final_k_witness(work, tables, N, k)

    def find_monochromatic(self, source: ColouringSource, N: int) -> Tuple[Solution, ProofTrace]:
        """在 [N, 10⁴N⁴] 的着色中构造单色解并给出证明轨迹"""
        self._require_input(source, N)

        k = self.find_boundary_k(source, N)
        if k is None:
            band = source.colour_at(9 * N)
            solution = Solution(N * N, 80 * N * N, 9 * N, band)
            trace = ProofTrace(False, MonochromaticBand(band), solution)
        else:
            flipped = source.colour_at(k) == Colour.MINUS
            work = FlippedColouring(source) if flipped else source
            witness = self._dispatch(work, N, k)
            solution = witness.solution.flipped() if flipped else witness.solution
            trace = ProofTrace(flipped, witness.case, solution)

        check = verify_solution(source, solution)
        if not check:
            raise InternalContradictionError(f"分支 {trace.case.tag} 给出的解 {solution.triple} 校验失败：{check.reason}")
        logger.info("N=%d：分支 %s 给出单色解 %s（颜色 %s）", N, trace.case.tag, solution.triple, solution.colour)
        return solution, trace

    def check_trace(self, source: ColouringSource, N: int, trace: ProofTrace) -> SolutionCheck:
        """重放证明轨迹，确认能重新推出同一个解且解成立"""
        case = trace.case
        if isinstance(case, MonochromaticBand):
            if trace.flipped or self.find_boundary_k(source, N) is not None:
                return SolutionCheck(False, "replay")
            derived = Solution(N * N, 80 * N * N, 9 * N, source.colour_at(9 * N))
        else:
            k = case.k
            flipped = source.colour_at(k) == Colour.MINUS
            if flipped != trace.flipped:
                return SolutionCheck(False, "flip")
            work = FlippedColouring(source) if flipped else source
            derived = self._replay_case(work, N, case)
            if derived is None:
                return SolutionCheck(False, "replay")
            if flipped:
                derived = derived.flipped()
        if derived != trace.solution:
            return SolutionCheck(False, "replay")
        return verify_solution(source, derived)

    def _replay_case(self, work: ColouringSource, N: int, case: ProofCase) -> Optional[Solution]:
        k = case.k
        if isinstance(case, PairSumAtK):
            return Solution.canonical(case.i, k * k - case.i, k, Colour.PLUS)
        if isinstance(case, PairSumAtKPlus1):
            return Solution.canonical(case.i, (k + 1) ** 2 - case.i, k + 1, Colour.MINUS)
        if isinstance(case, FinalK):
            x, y = _final_k_pair(N, k, case.u, case.v)
            return Solution.canonical(x, y, k, Colour.PLUS)
        tables = self.build_residue_tables(work, N, k)
        if isinstance(case, IntervalSum):
            x = tables.f(case.j)
            return None if x is None else Solution.canonical(x, k * k - x, k, Colour.PLUS)
        x, y = _residue_square_pair(tables, case.m, case.j1, case.j2)
        return Solution.canonical(x, y, case.m, Colour.MINUS)

    def successive_solutions(self, source: ColouringSource, N_start: int,
                             count: int) -> List[Tuple[Solution, ProofTrace]]:
        """
        在窗口 [N_t, 10⁴N_t⁴] 上反复求解，N_{t+1} = min(x, z) + 1
        得到的解两两不同；窗口超出 2^62 时提前停止
        """
        self._require_N(N_start)
        results: List[Tuple[Solution, ProofTrace]] = []
        N = N_start
        while len(results) < count:
            try:
                domain = finder_domain(N)
            except ArithmeticOverflowError:
                logger.info("N=%d 的窗口超出 2^62，停止（已得到 %d 个解）", N, len(results))
                break
            solution, trace = self.find_monochromatic(source.with_domain(domain), N)
            results.append((solution, trace))
            N = min(solution.x, solution.z) + 1
        return results

    def _require_N(self, N: int):
        if N < MIN_VALID_N:
            raise PreconditionError(f"N={N} 小于经审计的下限 N₀={MIN_VALID_N}")

    def _require_input(self, source: ColouringSource, N: int):
        self._require_N(N)
        expected = finder_domain(N)
        if source.domain != expected:
            raise PreconditionError(f"着色定义域 {source.domain} 必须恰好是 {expected}")


def _residue_square_pair(tables: ResidueTable, m: int, j1: int, j2: int) -> Tuple[int, int]:
    m2 = m * m
    x = align_up(max(j1, m2 - tables.g(j2)), j1, tables.modulus)
    return x, m2 - x


def _final_k_pair(N: int, k: int, u: int, v: int) -> Tuple[int, int]:
    k2 = k * k
    x = align_up(max(u, k2 - class_top(N, k, v)), u, 2 * k + 1)
    return x, k2 - x


def find_monochromatic(source: ColouringSource, N: int,
                       config: MonoSquareConfig = None) -> Tuple[Solution, ProofTrace]:
    return ProofFinderModule(config).find_monochromatic(source, N)
