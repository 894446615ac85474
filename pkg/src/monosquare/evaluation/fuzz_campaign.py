"""
随机着色上的批量求解与校验
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
import pandas as pd
from tqdm import tqdm

from monosquare.colouring.colouring_source import FlippedColouring, RandomColouring
from monosquare.config import DEFAULT_CONFIG, MonoSquareConfig
from monosquare.errors import PreconditionError
from monosquare.finder.proof_finder import ProofFinderModule, finder_domain, min_valid_N
from monosquare.finder.residue_tables import certify_monotone_classes
from monosquare.oracle.brute_force import verify_solution

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# 这些分支会构建剩余类表
TABLE_CASES = ("interval_sum", "residue_square", "final_k")


@dataclass
class FuzzReport:
    count: int
    N: int
    seed: int
    verified: int = 0
    flipped: int = 0
    failures: List[int] = field(default_factory=list)
    case_histogram: Dict[str, int] = field(default_factory=dict)
    monotone_checks: int = 0
    monotone_violations: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures and self.monotone_violations == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "count": self.count,
            "N": self.N,
            "seed": self.seed,
            "verified": self.verified,
            "flipped": self.flipped,
            "failures": list(self.failures),
            "case_histogram": dict(self.case_histogram),
            "monotone_checks": self.monotone_checks,
            "monotone_violations": self.monotone_violations,
        }

    def histogram_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(sorted(self.case_histogram.items()), columns=["case", "runs"])
        frame["share"] = frame["runs"] / max(self.count, 1)
        return frame


def run_seeds(seed: int, count: int) -> List[int]:
    """由主种子派生每一轮的 64 位种子"""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)]


def _run_one(N: int, run_seed: int, config: MonoSquareConfig) -> Dict[str, Any]:
    finder = ProofFinderModule(config)
    source = RandomColouring(finder_domain(N), run_seed)
    outcome: Dict[str, Any] = {"seed": run_seed, "ok": False, "tag": None, "flipped": False, "violations": None}
    try:
        solution, trace = finder.find_monochromatic(source, N)
    except Exception as e:
        logger.error("种子 %d 求解失败：%s", run_seed, e)
        return outcome

    outcome["tag"] = trace.case.tag
    outcome["flipped"] = trace.flipped
    outcome["ok"] = bool(verify_solution(source, solution)) and bool(finder.check_trace(source, N, trace))
    if trace.case.tag in TABLE_CASES:
        work = FlippedColouring(source) if trace.flipped else source
        outcome["violations"] = certify_monotone_classes(
            work, N, trace.case.k, sample=config.monotone_sample, seed=run_seed % (1 << 32)
        )
    return outcome


def run_fuzz_campaign(count: int, N: int, seed: int, jobs: int = 1,
                      config: MonoSquareConfig = None, progress: bool = True) -> FuzzReport:
    """对 count 个随机着色运行求解器；结果与 jobs 无关"""
    config = config or DEFAULT_CONFIG
    if N < min_valid_N():
        raise PreconditionError(f"N={N} 小于经审计的下限 N₀={min_valid_N()}")
    seeds = run_seeds(seed, count)
    logger.info("开始随机测试：count=%d, N=%d, seed=%d, jobs=%d", count, N, seed, jobs)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(tqdm(
                pool.map(_run_one, [N] * count, seeds, [config] * count, chunksize=max(1, count // (4 * jobs))),
                total=count, disable=not progress,
            ))
    else:
        outcomes = [_run_one(N, s, config) for s in tqdm(seeds, disable=not progress)]

    report = FuzzReport(count=count, N=N, seed=seed)
    tags = []
    for outcome in outcomes:
        if outcome["ok"]:
            report.verified += 1
        else:
            report.failures.append(outcome["seed"])
        if outcome["flipped"]:
            report.flipped += 1
        if outcome["tag"]:
            tags.append(outcome["tag"])
        if outcome["violations"] is not None:
            report.monotone_checks += 1
            report.monotone_violations += outcome["violations"]
    report.case_histogram = {str(k): int(v) for k, v in pd.Series(tags, dtype=object).value_counts().sort_index().items()}

    logger.info("随机测试完成：%d/%d 通过校验，分支分布 %s", report.verified, count, report.case_histogram)
    if report.failures:
        logger.warning("%d 个种子失败：%s", len(report.failures), report.failures[:10])
    return report
