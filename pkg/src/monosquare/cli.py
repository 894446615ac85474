"""
命令行入口
标准输出只写机器可读的运行报告，日志写到标准错误
"""
import functools
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
import pandas as pd
from pydantic import BaseModel

from monosquare import __version__
from monosquare.colouring.colouring_io import colouring_to_dict, load_colouring, save_colouring
from monosquare.colouring.colouring_source import (
    Colour,
    ColouringSource,
    Interval,
    PeriodicColouring,
    RandomColouring,
    constant_colouring,
)
from monosquare.config import MonoSquareConfig
from monosquare.errors import (
    ColouringParseError,
    InternalContradictionError,
    MonoSquareError,
    PreconditionError,
)
from monosquare.evaluation.fuzz_campaign import run_fuzz_campaign
from monosquare.extremal.avoidance import BandLayout, two_band_colouring, verify_avoidance
from monosquare.finder.proof_finder import ProofFinderModule, ProofTrace, finder_domain, min_valid_N
from monosquare.oracle.brute_force import Solution, enumerate_solutions, verify_solution
from monosquare.threshold.dimacs_export import write_dimacs
from monosquare.threshold.threshold_search import build_instance, search_S

logger = logging.getLogger(__name__)


class RunReport(BaseModel):
    """一次命令运行的完整记录"""

    command: str
    parameters: Dict[str, Any]
    result: Any
    timing_ms: float
    version: str = __version__


def _emit(ctx: click.Context, command: str, started: float, result: Any,
          human: Optional[Callable[[], pd.DataFrame]] = None):
    if ctx.params.get("human") and human is not None:
        click.echo(human().to_string(index=False))
        return
    report = RunReport(
        command=command,
        parameters={k: list(v) if isinstance(v, tuple) else v for k, v in ctx.params.items()},
        result=result,
        timing_ms=round((time.perf_counter() - started) * 1000, 3),
    )
    click.echo(report.model_dump_json(indent=2))


def _fail(error: Exception, exit_code: int):
    logger.error("%s", error)
    click.echo(f"错误：{error}", err=True)
    sys.exit(exit_code)


def guarded(fn):
    """把库异常映射到退出码：2 用法/前置条件，3 内部矛盾，4 解析与读写"""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MonoSquareError as e:
            _fail(e, e.exit_code)
        except OSError as e:
            _fail(e, 4)

    return wrapper


def colouring_options(fn):
    """生成器参数：--all / --random-seed / --periodic / --file，四选一"""
    fn = click.option("--file", "file_", type=click.Path(dir_okay=False), help="着色文件")(fn)
    fn = click.option("--periodic", help="周期模式，如 +1,-1,-1（锚点为定义域下界）")(fn)
    fn = click.option("--random-seed", type=int, help="种子随机着色")(fn)
    fn = click.option("--all", "all_", type=click.Choice(["+1", "-1"]), help="常数着色")(fn)
    return fn


def build_source(domain: Optional[Interval], all_: Optional[str], random_seed: Optional[int],
                 periodic: Optional[str], file_: Optional[str]) -> ColouringSource:
    chosen = [flag for flag, value in (("--all", all_), ("--random-seed", random_seed),
                                       ("--periodic", periodic), ("--file", file_)) if value is not None]
    if len(chosen) != 1:
        raise click.UsageError("必须且只能指定 --all、--random-seed、--periodic、--file 中的一个")
    if file_ is not None:
        source = load_colouring(file_)
        if domain is not None and source.domain != domain:
            raise PreconditionError(f"着色文件的定义域 {source.domain} 与要求的 {domain} 不一致")
        return source
    if domain is None:
        raise click.UsageError("生成器着色需要 --n 或 --lo/--hi 给出定义域")
    if all_ is not None:
        return constant_colouring(domain, Colour.parse(all_))
    if random_seed is not None:
        return RandomColouring(domain, random_seed)
    try:
        pattern = tuple(Colour.parse(p) for p in periodic.split(","))
    except ValueError as e:
        raise click.UsageError(str(e))
    return PeriodicColouring(domain, len(pattern), pattern, domain.lo)


def _domain(n: Optional[int], lo: Optional[int], hi: Optional[int]) -> Optional[Interval]:
    if n is not None:
        return finder_domain(n)
    if lo is not None and hi is not None:
        return Interval(lo, hi)
    if lo is not None or hi is not None:
        raise click.UsageError("--lo 与 --hi 必须同时给出")
    return None


def _solutions_frame(solutions) -> pd.DataFrame:
    return pd.DataFrame([s.to_dict() for s in solutions], columns=["x", "y", "z", "colour", "x_equals_y"])


@click.group()
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="日志级别（默认取配置）")
@click.version_option(__version__)
@click.pass_context
def main(ctx: click.Context, log_level: Optional[str]):
    """x+y=z² 单色解工具包"""
    overrides = {"log_level": log_level.upper()} if log_level else {}
    config = MonoSquareConfig.from_env(**overrides)
    logging.basicConfig(
        level=getattr(logging, config.log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    ctx.obj = config


@main.command()
@click.option("--n", "n", type=int, required=True, help=f"N（至少 {min_valid_N()}）")
@colouring_options
@click.option("--successive", type=int, default=None, help="在递增窗口上连续求解的次数")
@click.option("--human", is_flag=True, help="以表格输出")
@click.pass_context
@guarded
def find(ctx, n, all_, random_seed, periodic, file_, successive, human):
    """在 [N, 10⁴N⁴] 上构造单色解"""
    started = time.perf_counter()
    finder = ProofFinderModule(ctx.obj)
    if n < min_valid_N():
        raise PreconditionError(f"N={n} 小于经审计的下限 N₀={min_valid_N()}")
    source = build_source(finder_domain(n), all_, random_seed, periodic, file_)

    if successive:
        runs = finder.successive_solutions(source, n, successive)
        result = [{"solution": s.to_dict(), "trace": t.to_dict()} for s, t in runs]
        _emit(ctx, "find", started, result, lambda: pd.DataFrame(
            [{**s.to_dict(), "case": t.case.tag} for s, t in runs]))
        return

    solution, trace = finder.find_monochromatic(source, n)
    _emit(ctx, "find", started, {"solution": solution.to_dict(), "trace": trace.to_dict()},
          lambda: pd.DataFrame([{**solution.to_dict(), "case": trace.case.tag, "flipped": trace.flipped}]))


@main.command()
@colouring_options
@click.option("--lo", type=int, default=None)
@click.option("--hi", type=int, default=None)
@click.option("--limit", type=int, default=None, help="最多输出的解数")
@click.option("--include-trivial", is_flag=True, help="把 2+2=2² 也算作解")
@click.option("--human", is_flag=True)
@click.pass_context
@guarded
def oracle(ctx, all_, random_seed, periodic, file_, lo, hi, limit, include_trivial, human):
    """暴力枚举单色解"""
    started = time.perf_counter()
    source = build_source(_domain(None, lo, hi), all_, random_seed, periodic, file_)
    solutions = enumerate_solutions(source, exclude_trivial=not include_trivial, limit=limit,
                                    max_domain=ctx.obj.oracle_max_domain)
    _emit(ctx, "oracle", started, {"count": len(solutions), "solutions": [s.to_dict() for s in solutions]},
          lambda: _solutions_frame(solutions))


@main.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="写出着色文件")
@click.option("--bands", type=click.Choice(["thirds", "tight"]), default="thirds", help="分段方式")
@click.option("--verify", "check", is_flag=True, help="用暴力枚举确认无单色解")
@click.option("--human", is_flag=True)
@click.pass_context
@guarded
def extremal(ctx, n, out, bands, check, human):
    """输出无单色解的两段着色"""
    started = time.perf_counter()
    layout = BandLayout.tight(n) if bands == "tight" else BandLayout.thirds(n)
    colouring = two_band_colouring(layout.N, layout.split, layout.top)
    if out:
        save_colouring(colouring, out)
    verified = verify_avoidance(n, bands, ctx.obj) if check else None
    _emit(ctx, "extremal", started,
          {"bands": bands, **layout.to_dict(), "verified": verified, "colouring": colouring_to_dict(colouring)},
          lambda: pd.DataFrame([{"bands": bands, **layout.to_dict(), "verified": verified}]))


def _load_trace(path: str) -> ProofTrace:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if "result" in data:
            data = data["result"]["trace"]
        return ProofTrace.from_dict(data)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ColouringParseError(f"无法读取证明轨迹：{e}", path)


@main.command()
@colouring_options
@click.option("--n", "n", type=int, default=None, help="轨迹对应的 N；定义域为 [N, 10⁴N⁴]")
@click.option("--lo", type=int, default=None)
@click.option("--hi", type=int, default=None)
@click.option("--trace", "trace_file", type=click.Path(dir_okay=False), default=None,
              help="find 的报告或单独的轨迹文件")
@click.option("--solution", nargs=3, type=int, default=None, help="直接校验 X Y Z")
@click.option("--colour", type=click.Choice(["+1", "-1"]), default=None, help="--solution 的颜色")
@click.option("--human", is_flag=True)
@click.pass_context
@guarded
def verify(ctx, all_, random_seed, periodic, file_, n, lo, hi, trace_file, solution, colour, human):
    """重放证明轨迹或校验给定的解"""
    started = time.perf_counter()
    if (trace_file is None) == (solution is None):
        raise click.UsageError("必须且只能指定 --trace 与 --solution 中的一个")
    source = build_source(_domain(n, lo, hi), all_, random_seed, periodic, file_)

    if trace_file is not None:
        if n is None:
            raise click.UsageError("重放轨迹需要 --n")
        trace = _load_trace(trace_file)
        check = ProofFinderModule(ctx.obj).check_trace(source, n, trace)
        candidate = trace.solution
    else:
        x, y, z = solution
        if colour:
            tone = Colour.parse(colour)
        else:
            # z 不在定义域内时交给 verify_solution 报告 domain
            tone = source.colour_at(z) if z in source.domain else Colour.PLUS
        candidate = Solution(x, y, z, tone)
        check = verify_solution(source, candidate)

    result = {"ok": check.ok, "reason": check.reason, "solution": candidate.to_dict()}
    _emit(ctx, "verify", started, result, lambda: pd.DataFrame([{"ok": check.ok, "reason": check.reason,
                                                                  **candidate.to_dict()}]))


@main.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--cap", type=int, required=True, help="M 的上限")
@click.option("--mode", type=click.Choice(["backtracking", "sat"]), default="backtracking")
@click.option("--include-trivial", is_flag=True, help="把 2+2=2² 也算作解")
@click.option("--jobs", type=int, envvar="MONO_SQUARE_JOBS", default=None, help="并行进程数")
@click.option("--human", is_flag=True)
@click.pass_context
@guarded
def threshold(ctx, n, cap, mode, include_trivial, jobs, human):
    """精确计算 S(N)"""
    started = time.perf_counter()
    result = search_S(n, cap, mode=mode, jobs=jobs or ctx.obj.jobs,
                      exclude_trivial=not include_trivial, config=ctx.obj)
    payload = result.to_dict()
    _emit(ctx, "threshold", started, payload,
          lambda: pd.DataFrame([{k: v for k, v in payload.items() if k != "witness"}]))


@main.command("export-sat")
@click.option("--n", "n", type=int, required=True)
@click.option("--m", "m", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--include-trivial", is_flag=True)
@click.pass_context
@guarded
def export_sat(ctx, n, m, out, include_trivial):
    """把 [N, M] 的实例导出为 DIMACS CNF"""
    started = time.perf_counter()
    instance = build_instance(n, m, not include_trivial, ctx.obj.threshold_max_M)
    write_dimacs(instance, out)
    _emit(ctx, "export-sat", started, {"variables": instance.size, "clauses": 2 * len(instance.triples),
                                       "triples": len(instance.triples), "out": out})


@main.command()
@click.option("--count", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--jobs", type=int, envvar="MONO_SQUARE_JOBS", default=None)
@click.option("--progress/--no-progress", default=True)
@click.option("--human", is_flag=True)
@click.pass_context
@guarded
def fuzz(ctx, count, n, seed, jobs, progress, human):
    """在随机着色上批量求解并校验"""
    started = time.perf_counter()
    report = run_fuzz_campaign(count, n, seed, jobs=jobs or ctx.obj.jobs, config=ctx.obj, progress=progress)
    _emit(ctx, "fuzz", started, report.to_dict(), report.histogram_frame)
    if not report.ok:
        raise InternalContradictionError(f"{len(report.failures)} 个运行未通过校验")


if __name__ == "__main__":
    main()
