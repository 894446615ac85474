"""
着色文件的序列化与反序列化
"""
import base64
import binascii
import json
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr, ValidationError

from monosquare.colouring.colouring_source import (
    BitmapColouring,
    Colour,
    ColouringSource,
    FlippedColouring,
    Interval,
    PeriodicColouring,
    PiecewiseColouring,
    RandomColouring,
    make_piecewise,
)
from monosquare.errors import ArithmeticOverflowError, ColouringParseError, ConstructionError

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

ColourText = Literal["+1", "-1"]


class _StrictModel(BaseModel):
    # 未知字段一律拒绝
    model_config = ConfigDict(extra="forbid")


class SegmentModel(_StrictModel):
    start: StrictInt = Field(alias="from")
    end: StrictInt = Field(alias="to")
    colour: ColourText


class PiecewiseRule(_StrictModel):
    type: Literal["piecewise"]
    segments: List[SegmentModel]


class PeriodicRule(_StrictModel):
    type: Literal["periodic"]
    period: StrictInt
    anchor: StrictInt
    pattern: List[ColourText]


class BitmapRule(_StrictModel):
    type: Literal["bitmap"]
    offset: StrictInt
    bits_base64: StrictStr


class RandomRule(_StrictModel):
    type: Literal["random"]
    seed: StrictInt


class FlipRule(_StrictModel):
    type: Literal["flip"]
    inner: "RuleModel"


RuleModel = Annotated[
    Union[PiecewiseRule, PeriodicRule, BitmapRule, RandomRule, FlipRule],
    Field(discriminator="type"),
]
FlipRule.model_rebuild()


class ColouringDocument(_StrictModel):
    domain: Annotated[List[StrictInt], Field(min_length=2, max_length=2)]
    rule: RuleModel


def _rule_to_dict(source: ColouringSource) -> Dict[str, Any]:
    if isinstance(source, PiecewiseColouring):
        return {
            "type": "piecewise",
            "segments": [{"from": seg.lo, "to": seg.hi, "colour": str(c)} for seg, c in source.segments],
        }
    if isinstance(source, PeriodicColouring):
        return {
            "type": "periodic",
            "period": source.period,
            "anchor": source.anchor,
            "pattern": [str(c) for c in source.pattern],
        }
    if isinstance(source, BitmapColouring):
        return {
            "type": "bitmap",
            "offset": source.offset,
            "bits_base64": base64.b64encode(source.bits).decode("ascii"),
        }
    if isinstance(source, RandomColouring):
        return {"type": "random", "seed": source.seed}
    if isinstance(source, FlippedColouring):
        return {"type": "flip", "inner": _rule_to_dict(source.inner)}
    raise TypeError(f"无法序列化的着色类型：{type(source).__name__}")


def colouring_to_dict(source: ColouringSource) -> Dict[str, Any]:
    return {"domain": [source.domain.lo, source.domain.hi], "rule": _rule_to_dict(source)}


def serialize(source: ColouringSource) -> str:
    """着色源 -> 文本"""
    return json.dumps(colouring_to_dict(source), ensure_ascii=False, indent=2)


def _build(domain: Interval, rule) -> ColouringSource:
    if isinstance(rule, PiecewiseRule):
        segments = []
        for i, s in enumerate(rule.segments):
            try:
                segments.append((Interval(s.start, s.end), Colour.parse(s.colour)))
            except (ConstructionError, ArithmeticOverflowError) as e:
                raise ColouringParseError(f"第 {i} 段非法：{e}", f"rule.segments.{i}") from e
        try:
            return make_piecewise(domain, segments)
        except ConstructionError as e:
            raise ColouringParseError(f"分段没有恰好覆盖定义域：{e}", f"rule.segments（边界 {e.boundary}）") from e
    if isinstance(rule, PeriodicRule):
        return PeriodicColouring(domain, rule.period, tuple(Colour.parse(c) for c in rule.pattern), rule.anchor)
    if isinstance(rule, BitmapRule):
        try:
            bits = base64.b64decode(rule.bits_base64, validate=True)
        except (binascii.Error, ValueError) as e:
            raise ColouringParseError(f"bits_base64 不是合法的 base64：{e}", "rule.bits_base64")
        return BitmapColouring(domain, rule.offset, bits)
    if isinstance(rule, RandomRule):
        return RandomColouring(domain, rule.seed)
    return FlippedColouring(_build(domain, rule.inner))


def colouring_from_dict(data: Any) -> ColouringSource:
    try:
        doc = ColouringDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        position = ".".join(str(p) for p in first["loc"])
        raise ColouringParseError(f"着色文档结构错误：{first['msg']}", position)
    lo, hi = doc.domain
    try:
        domain = Interval(lo, hi)
    except (ConstructionError, ArithmeticOverflowError) as e:
        raise ColouringParseError(f"定义域非法：{e}", "domain") from e
    try:
        return _build(domain, doc.rule)
    except ConstructionError as e:
        raise ColouringParseError(f"着色规则非法：{e}", "rule") from e


def deserialize(text: str) -> ColouringSource:
    """文本 -> 着色源"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ColouringParseError(f"JSON 解析失败：{e.msg}", f"第{e.lineno}行第{e.colno}列")
    return colouring_from_dict(data)


def load_colouring(path: str) -> ColouringSource:
    source = deserialize(Path(path).read_text(encoding="utf-8"))
    logger.info("从 %s 读取着色：%s，定义域 %s", path, source.rule_type, source.domain)
    return source


def save_colouring(source: ColouringSource, path: str):
    Path(path).write_text(serialize(source), encoding="utf-8")
    logger.info("着色已写入 %s", path)
