import base64
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monosquare.colouring.colouring_io import (
    colouring_to_dict,
    deserialize,
    load_colouring,
    save_colouring,
    serialize,
)
from monosquare.colouring.colouring_source import (
    BitmapColouring,
    Colour,
    FlippedColouring,
    Interval,
    PeriodicColouring,
    RandomColouring,
    checked_mul,
    checked_square,
    constant_colouring,
    make_piecewise,
    piecewise_from_runs,
)
from monosquare.errors import (
    ArithmeticOverflowError,
    ColouringParseError,
    ConstructionError,
    DomainError,
)


# ---------- fixtures ----------

@pytest.fixture
def two_band():
    """[4,5] 为 +1，[6,9] 为 -1"""
    return make_piecewise(Interval(4, 9), [(Interval(4, 5), Colour.PLUS), (Interval(6, 9), Colour.MINUS)])


# ---------- 颜色与区间 ----------

def test_colour_negation_and_text():
    assert -Colour.PLUS == Colour.MINUS
    assert str(Colour.MINUS) == "-1"
    assert Colour.parse("+1") is Colour.PLUS
    with pytest.raises(ValueError):
        Colour.parse("0")

def test_interval_rejects_bad_bounds():
    with pytest.raises(ConstructionError):
        Interval(0, 5)
    with pytest.raises(ConstructionError):
        Interval(7, 6)
    with pytest.raises(ArithmeticOverflowError):
        Interval(1, (1 << 62) + 1)

def test_checked_arithmetic_overflow():
    assert checked_square(1 << 31) == 1 << 62
    with pytest.raises(ArithmeticOverflowError):
        checked_mul(1 << 40, 1 << 40)


# ---------- 分段着色 ----------

def test_piecewise_lookup(two_band):
    assert two_band.colour_at(4) == Colour.PLUS
    assert two_band.colour_at(5) == Colour.PLUS
    assert two_band.colour_at(6) == Colour.MINUS
    assert two_band.colour_at(9) == Colour.MINUS

def test_piecewise_out_of_domain(two_band):
    with pytest.raises(DomainError):
        two_band.colour_at(10)
    with pytest.raises(DomainError):
        two_band.colour_at(3)

def test_piecewise_gap_names_boundary():
    with pytest.raises(ConstructionError) as exc:
        make_piecewise(Interval(1, 10), [(Interval(1, 4), Colour.PLUS), (Interval(6, 10), Colour.MINUS)])
    assert exc.value.boundary == 5

def test_piecewise_overlap_names_boundary():
    with pytest.raises(ConstructionError) as exc:
        make_piecewise(Interval(1, 10), [(Interval(1, 5), Colour.PLUS), (Interval(5, 10), Colour.MINUS)])
    assert exc.value.boundary == 5

def test_piecewise_overhang():
    with pytest.raises(ConstructionError) as exc:
        make_piecewise(Interval(1, 10), [(Interval(1, 11), Colour.PLUS)])
    assert exc.value.boundary == 11

def test_colours_at_matches_colour_at(two_band):
    ns = np.arange(4, 10)
    expected = [int(two_band.colour_at(n)) for n in ns]
    assert two_band.colours_at(ns).tolist() == expected

def test_colours_at_reports_offender(two_band):
    with pytest.raises(DomainError) as exc:
        two_band.colours_at([5, 6, 12])
    assert exc.value.n == 12

def test_piecewise_from_runs_compresses():
    source = piecewise_from_runs(Interval(10, 16), [1, 1, -1, -1, -1, 1, 1])
    assert len(source.segments) == 3
    assert source.segments[1] == (Interval(12, 14), Colour.MINUS)

def test_piecewise_with_domain_clips(two_band):
    clipped = two_band.with_domain(Interval(5, 7))
    assert [c for _, c in clipped.segments] == [Colour.PLUS, Colour.MINUS]
    with pytest.raises(ConstructionError):
        two_band.with_domain(Interval(1, 7))


# ---------- 其他规则 ----------

def test_periodic_pattern():
    source = PeriodicColouring(Interval(1, 20), 3, (Colour.PLUS, Colour.MINUS, Colour.MINUS), 1)
    assert [int(source.colour_at(n)) for n in range(1, 7)] == [1, -1, -1, 1, -1, -1]

def test_periodic_length_mismatch():
    with pytest.raises(ConstructionError):
        PeriodicColouring(Interval(1, 20), 3, (Colour.PLUS,), 1)

def test_bitmap_bit_order():
    # 第 0 位 -> 10，第 1 位 -> 11
    source = BitmapColouring(Interval(10, 13), 10, bytes([0b0101]))
    assert [int(source.colour_at(n)) for n in range(10, 14)] == [1, -1, 1, -1]

def test_bitmap_wrong_length():
    with pytest.raises(ConstructionError):
        BitmapColouring(Interval(1, 9), 1, bytes([0]))

def test_bitmap_offset_must_match():
    with pytest.raises(ConstructionError):
        BitmapColouring(Interval(1, 8), 2, bytes([0]))

def test_random_is_order_independent():
    source = RandomColouring(Interval(1, 10 ** 12), 42)
    points = [10 ** 12, 7, 123456789, 8]
    forward = [source.colour_at(n) for n in points]
    backward = [source.colour_at(n) for n in reversed(points)]
    assert forward == backward[::-1]
    assert RandomColouring(Interval(1, 10 ** 12), 42).colour_at(7) == forward[1]

def test_random_with_domain_keeps_colours():
    source = RandomColouring(Interval(1, 1000), 5)
    moved = source.with_domain(Interval(500, 10 ** 9))
    assert all(source.colour_at(n) == moved.colour_at(n) for n in range(500, 1001))

def test_random_rejects_negative_seed():
    with pytest.raises(ConstructionError):
        RandomColouring(Interval(1, 10), -1)

@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 64 - 1), lo=st.integers(1, 10 ** 15))
def test_random_vector_matches_scalar(seed, lo):
    source = RandomColouring(Interval(1, 10 ** 16), seed)
    ns = np.arange(lo, lo + 64, dtype=np.int64)
    assert source.colours_at(ns).tolist() == [int(source.colour_at(int(n))) for n in ns]

@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32), n=st.integers(1, 10 ** 6))
def test_flip_is_involution(seed, n):
    source = RandomColouring(Interval(1, 10 ** 6), seed)
    assert FlippedColouring(FlippedColouring(source)).colour_at(n) == source.colour_at(n)
    assert FlippedColouring(source).colour_at(n) == -source.colour_at(n)


# ---------- 序列化 ----------

@settings(max_examples=40, deadline=None)
@given(colours=st.lists(st.sampled_from([1, -1]), min_size=1, max_size=80), lo=st.integers(1, 1000))
def test_piecewise_and_bitmap_text_round_trip(colours, lo):
    domain = Interval(lo, lo + len(colours) - 1)
    for source in (piecewise_from_runs(domain, colours), BitmapColouring.from_colours(domain, colours)):
        restored = deserialize(serialize(source))
        assert restored.domain == domain
        assert restored.colours_at(np.arange(domain.lo, domain.hi + 1)).tolist() == colours

def test_flip_document_nests_rule():
    source = FlippedColouring(RandomColouring(Interval(1, 100), 9))
    data = colouring_to_dict(source)
    assert data["rule"] == {"type": "flip", "inner": {"type": "random", "seed": 9}}
    assert deserialize(json.dumps(data)).colour_at(50) == source.colour_at(50)

def test_bitmap_document_uses_base64():
    source = BitmapColouring.from_colours(Interval(3, 10), [1, -1, -1, 1, 1, 1, -1, 1])
    data = colouring_to_dict(source)
    assert base64.b64decode(data["rule"]["bits_base64"]) == source.bits

def test_unknown_key_rejected():
    text = json.dumps({"domain": [1, 4], "rule": {"type": "random", "seed": 1, "extra": True}})
    with pytest.raises(ColouringParseError) as exc:
        deserialize(text)
    assert "rule" in exc.value.position

def test_bad_colour_rejected():
    text = json.dumps({
        "domain": [1, 4],
        "rule": {"type": "piecewise", "segments": [{"from": 1, "to": 4, "colour": "red"}]},
    })
    with pytest.raises(ColouringParseError):
        deserialize(text)

def test_malformed_json_reports_position():
    with pytest.raises(ColouringParseError) as exc:
        deserialize('{"domain": [1, 4],\n "rule": ')
    assert exc.value.position.startswith("第2行")

def test_invalid_tiling_in_document_is_parse_error():
    text = json.dumps({
        "domain": [1, 10],
        "rule": {"type": "piecewise", "segments": [{"from": 1, "to": 4, "colour": "+1"}]},
    })
    with pytest.raises(ColouringParseError) as exc:
        deserialize(text)
    assert exc.value.position.startswith("rule.segments")
    assert isinstance(exc.value.__cause__, ConstructionError)

def test_reversed_segment_names_its_index():
    text = json.dumps({
        "domain": [1, 10],
        "rule": {"type": "piecewise", "segments": [
            {"from": 1, "to": 4, "colour": "+1"},
            {"from": 10, "to": 5, "colour": "-1"},
        ]},
    })
    with pytest.raises(ColouringParseError) as exc:
        deserialize(text)
    assert exc.value.position == "rule.segments.1"

def test_bad_domain_is_parse_error():
    text = json.dumps({"domain": [0, 5], "rule": {"type": "random", "seed": 1}})
    with pytest.raises(ColouringParseError) as exc:
        deserialize(text)
    assert exc.value.position == "domain"
    assert exc.value.exit_code == 4

def test_bad_periodic_rule_is_parse_error():
    text = json.dumps({"domain": [1, 10], "rule": {"type": "periodic", "period": 3, "anchor": 1, "pattern": ["+1"]}})
    with pytest.raises(ColouringParseError) as exc:
        deserialize(text)
    assert exc.value.position == "rule"

def test_save_and_load(tmp_path):
    source = constant_colouring(Interval(2, 30), Colour.MINUS)
    path = tmp_path / "c.json"

    save_colouring(source, str(path))

    assert load_colouring(str(path)) == source
