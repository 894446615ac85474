"""
DIMACS CNF 编码与外部 CDCL 求解
每个元素一个布尔变量（下标 element - N + 1，真 ↦ +1）
每个三元组两条子句：(¬x ∨ ¬y ∨ ¬z) 与 (x ∨ y ∨ z)
"""
import logging
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pysat.formula import CNF
from pysat.solvers import Cadical195

from monosquare.colouring.colouring_source import BitmapColouring, Interval
from monosquare.errors import InternalContradictionError
from monosquare.oracle.brute_force import TRIVIAL_TRIPLE, find_any_solution
from monosquare.threshold.threshold_search import NaeInstance

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


def triple_clauses(N: int, triple: Tuple[int, int, int]) -> List[List[int]]:
    """子句内重复的文字去掉，保持 x, y, z 的顺序"""
    lits = list(dict.fromkeys(v - N + 1 for v in triple))
    return [[-lit for lit in lits], lits]


def instance_clauses(instance: NaeInstance) -> List[List[int]]:
    clauses: List[List[int]] = []
    for triple in instance.triples:
        clauses.extend(triple_clauses(instance.N, triple))
    return clauses


def encode_dimacs(instance: NaeInstance) -> str:
    clauses = instance_clauses(instance)
    lines = [
        f"c n={instance.N} m={instance.M} triples={len(instance.triples)}",
        f"p cnf {instance.size} {len(clauses)}",
    ]
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in clauses)
    return "\n".join(lines) + "\n"


def write_dimacs(instance: NaeInstance, path: str):
    Path(path).write_text(encode_dimacs(instance), encoding="utf-8")
    logger.info("CNF 已写入 %s：%d 个变量，%d 个三元组", path, instance.size, len(instance.triples))


def _decode(N: int, M: int, model: Optional[Sequence[int]]) -> BitmapColouring:
    """模型里没有出现的变量取 +1"""
    size = M - N + 1
    colours = np.ones(size, dtype=np.int8)
    for lit in model or ():
        if lit < 0 and -lit <= size:
            colours[-lit - 1] = -1
    return BitmapColouring.from_colours(Interval(N, M), colours)


def decode_model(instance: NaeInstance, model: Optional[Sequence[int]]) -> BitmapColouring:
    return _decode(instance.N, instance.M, model)


def solve_external(instance: NaeInstance) -> Optional[BitmapColouring]:
    """用 CaDiCaL 求解 CNF；可满足时解码出见证着色并用暴力枚举复核"""
    cnf = CNF(from_string=encode_dimacs(instance))
    with Cadical195(bootstrap_with=cnf.clauses) as solver:
        if not solver.solve():
            logger.info("[%d, %d]：外部求解器判定不可满足", instance.N, instance.M)
            return None
        witness = decode_model(instance, solver.get_model())
    _check_witness(witness)
    return witness


def _check_witness(witness: BitmapColouring):
    found = find_any_solution(witness)
    if found is not None:
        raise InternalContradictionError(f"求解器给出的着色含单色解 {found.triple}")


def triples_ending_at(N: int, M: int, exclude_trivial: bool = True) -> Iterable[Tuple[int, int, int]]:
    """[N, M] 相对 [N, M-1] 新增的三元组（y = M）"""
    z_lo = max(N, math.isqrt(M + N - 1) + 1)
    z_hi = min(M, math.isqrt(2 * M))
    for z in range(z_lo, z_hi + 1):
        x = z * z - M
        if N <= x <= M:
            if exclude_trivial and (x, M, z) == TRIVIAL_TRIPLE:
                continue
            yield x, M, z


class IncrementalSatSearch:
    """M 递增时只追加新子句，复用同一个求解器"""

    def __init__(self, N: int, exclude_trivial: bool = True):
        self.N = N
        self.exclude_trivial = exclude_trivial
        self.M = N - 1
        self.solver = Cadical195()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.solver.delete()

    def extend_to(self, M: int) -> Optional[BitmapColouring]:
        """把定义域扩展到 [N, M] 后求解；不可满足时返回 None"""
        for m in range(self.M + 1, M + 1):
            for triple in triples_ending_at(self.N, m, self.exclude_trivial):
                for clause in triple_clauses(self.N, triple):
                    self.solver.add_clause(clause)
        self.M = M
        if not self.solver.solve():
            return None
        witness = _decode(self.N, M, self.solver.get_model())
        _check_witness(witness)
        return witness
