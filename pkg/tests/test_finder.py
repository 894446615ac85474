from unittest.mock import MagicMock

import numpy as np
import pytest

from monosquare.colouring.colouring_source import (
    Colour,
    FlippedColouring,
    Interval,
    RandomColouring,
    constant_colouring,
    make_piecewise,
    piecewise_from_runs,
)
from monosquare.config import MonoSquareConfig
from monosquare.errors import ConstructionError, DomainError, InternalContradictionError, PreconditionError
from monosquare.finder.proof_finder import (
    FinalK,
    IntervalSum,
    MonochromaticBand,
    PairSumAtK,
    PairSumAtKPlus1,
    ProofFinderModule,
    ProofTrace,
    ResidueSquare,
    audit_inequalities,
    case_from_dict,
    case_to_dict,
    find_monochromatic,
    finder_domain,
    min_valid_N,
)
from monosquare.finder.residue_tables import (
    NO_BREAK,
    build_residue_tables,
    certify_monotone_classes,
    class_tops,
    k_square_residue,
    linear_breaks,
    m_range,
)
from monosquare.oracle.brute_force import Solution, verify_solution

N0 = 17
K = 153


# ---------- fixtures ----------

@pytest.fixture
def finder():
    return ProofFinderModule()

@pytest.fixture
def all_plus():
    return constant_colouring(finder_domain(N0), Colour.PLUS)

@pytest.fixture
def all_minus():
    return constant_colouring(finder_domain(N0), Colour.MINUS)

@pytest.fixture
def low_plus():
    """[17, 160] 为 +1，其余为 -1"""
    domain = finder_domain(N0)
    return make_piecewise(domain, [(Interval(17, 160), Colour.PLUS), (Interval(161, domain.hi), Colour.MINUS)])


# ---------- 不等式审计 ----------

def test_min_valid_n():
    assert min_valid_N() == 17

def test_audit_holds_at_threshold():
    assert all(audit_inequalities(17).values())
    assert all(audit_inequalities(25).values())

def test_audit_fails_below_threshold():
    assert not all(audit_inequalities(16).values())
    assert audit_inequalities(9)["square_dominates_linear"] is False

def test_finder_domain_uses_checked_arithmetic():
    assert finder_domain(17) == Interval(17, 10 ** 4 * 17 ** 4)
    assert finder_domain(4634).hi <= 1 << 62


# ---------- 剩余类工具 ----------

def test_k_square_residue_examples():
    assert k_square_residue(10) == 16
    assert k_square_residue(11) == 6

def test_k_square_residue_parity_formula():
    for k in range(1, 10 ** 4 + 1):
        r = k_square_residue(k)
        assert r < 2 * k + 1
        assert r == (3 * k // 2 + 1 if k % 2 == 0 else (k + 1) // 2)

def test_m_range():
    assert m_range(153) == (31, 122)
    assert m_range(154) == (31, 123)

def test_class_tops_straddle_limit():
    tops = class_tops(N0, K)
    limit = K * K - N0
    assert np.all(tops > limit)
    assert np.all(tops - (2 * K + 1) <= limit)

def test_tables_all_minus(all_minus):
    tables = build_residue_tables(all_minus, N0, K)

    assert not tables.finite.any()
    assert (tables.breaks == NO_BREAK).all()
    assert tables.f(20) is None
    assert tables.g(20) == tables.top(20)
    assert tables.in_A.all()

def test_tables_definition_case():
    # 类 H_17 的前两个元素为 -1，之后为 +1
    modulus = 2 * K + 1
    domain = finder_domain(N0)
    source = make_piecewise(domain, [
        (Interval(17, 17 + 2 * modulus - 1), Colour.MINUS),
        (Interval(17 + 2 * modulus, domain.hi), Colour.PLUS),
    ])

    tables = build_residue_tables(source, N0, K)

    assert tables.f(17) == 17 + 2 * modulus
    assert tables.g(17) == 17 + modulus

def test_binary_search_matches_linear_scan(residue_square_colouring):
    tables = build_residue_tables(residue_square_colouring, N0, K)
    assert np.array_equal(tables.breaks, linear_breaks(residue_square_colouring, N0, K))

def test_binary_search_matches_linear_scan_on_random_monotone_classes():
    rng = np.random.default_rng(11)
    modulus = 2 * K + 1
    hi = K * K - N0 + modulus
    ns = np.arange(N0, hi + 1)
    cut = rng.integers(0, 80, size=modulus)
    steps = (ns - N0) // modulus
    colours = np.where(steps >= cut[(ns - N0) % modulus], 1, -1)
    source = piecewise_from_runs(Interval(N0, hi), colours)

    tables = build_residue_tables(source, N0, K)
    assert np.array_equal(tables.breaks, linear_breaks(source, N0, K))
    assert certify_monotone_classes(source, N0, K) == 0

def test_certify_detects_monotonicity_violation():
    modulus = 2 * K + 1
    domain = finder_domain(N0)
    # 类 H_17 中 +1 之后又出现 -1
    source = make_piecewise(domain, [
        (Interval(17, 17 + modulus - 1), Colour.MINUS),
        (Interval(17 + modulus, 17 + 3 * modulus - 1), Colour.PLUS),
        (Interval(17 + 3 * modulus, domain.hi), Colour.MINUS),
    ])
    assert certify_monotone_classes(source, N0, K) > 0


# ---------- 扫描 ----------

def test_find_boundary_k(finder, all_plus):
    assert finder.find_boundary_k(all_plus, N0) is None

    domain = finder_domain(N0)
    dip = make_piecewise(domain, [
        (Interval(17, 152), Colour.PLUS),
        (Interval(153, 153), Colour.MINUS),
        (Interval(154, domain.hi), Colour.PLUS),
    ])
    assert finder.find_boundary_k(dip, N0) == 153

def test_find_boundary_k_needs_valid_n(finder):
    with pytest.raises(PreconditionError):
        finder.find_boundary_k(constant_colouring(finder_domain(9), Colour.PLUS), 9)

def test_boundary_k_on_random_colouring_in_window(finder):
    k = finder.find_boundary_k(RandomColouring(finder_domain(N0), 1), N0)
    assert 153 <= k <= 23119

def test_scan_pair_sum_first_index(finder, all_plus, all_minus):
    assert finder.scan_pair_sum(all_plus, K * K, Colour.PLUS, N0, K * K - N0) == (N0, K * K - N0)
    assert finder.scan_pair_sum(all_minus, K * K, Colour.PLUS, N0, K * K - N0) is None

def test_scan_pair_sum_small_example(finder):
    source = make_piecewise(Interval(4, 20), [
        (Interval(4, 5), Colour.PLUS),
        (Interval(6, 9), Colour.MINUS),
        (Interval(10, 20), Colour.PLUS),
    ])
    assert finder.scan_pair_sum(source, 16, Colour.MINUS, 6, 10) == (7, 9)

def test_scan_pair_sum_outside_domain(finder):
    source = constant_colouring(Interval(4, 20), Colour.PLUS)
    with pytest.raises(DomainError):
        finder.scan_pair_sum(source, 30, Colour.PLUS, 4, 20)

def test_scan_chunks_grow_past_small_minimum():
    finder = ProofFinderModule(MonoSquareConfig(scan_chunk_min=1, scan_chunk_max=4))
    domain = finder_domain(N0)
    source = make_piecewise(domain, [(Interval(17, 999), Colour.MINUS), (Interval(1000, domain.hi), Colour.PLUS)])
    assert finder.scan_pair_sum(source, 1000 + 30000, Colour.PLUS, N0, 20000) == (1000, 30000)


# ---------- 各分支见证 ----------

def test_interval_sum_witness(finder, interval_sum_colouring):
    tables = finder.build_residue_tables(interval_sum_colouring, N0, K)

    witness = finder.interval_sum_witness(interval_sum_colouring, tables, N0, K)

    assert witness.case == IntervalSum(K, 17)
    assert witness.solution == Solution(11683, 11726, 153, Colour.PLUS)
    assert verify_solution(interval_sum_colouring, witness.solution)

def test_interval_sum_absent_when_all_infinite(finder, all_minus):
    tables = finder.build_residue_tables(all_minus, N0, K)
    assert finder.interval_sum_witness(all_minus, tables, N0, K) is None

def test_residue_square_all_minus(finder, all_minus):
    tables = finder.build_residue_tables(all_minus, N0, K)

    witness = finder.residue_square_witness(all_minus, tables, N0, K, 31)

    assert witness.case == ResidueSquare(K, 31, 17, 23)
    assert witness.solution == Solution(17, 944, 31, Colour.MINUS)
    assert verify_solution(all_minus, witness.solution)

def test_residue_square_absent_when_m_plus(finder, all_minus):
    tables = finder.build_residue_tables(all_minus, N0, K)
    flipped_m = make_piecewise(finder_domain(N0), [
        (Interval(17, 30), Colour.MINUS),
        (Interval(31, 31), Colour.PLUS),
        (Interval(32, finder_domain(N0).hi), Colour.MINUS),
    ])
    assert finder.residue_square_witness(flipped_m, tables, N0, K, 31) is None

def test_residue_square_rejects_m_outside_range(finder, all_minus):
    with pytest.raises(PreconditionError):
        finder.residue_square_witness(all_minus, MagicMock(), N0, K, 30)

def test_final_k_odd(finder, all_plus):
    witness = finder.final_k_witness(all_plus, MagicMock(), N0, K)

    assert witness.case == FinalK(153, 38, 39)
    assert witness.solution == Solution(38, 23371, 153, Colour.PLUS)
    assert verify_solution(all_plus, witness.solution)

def test_final_k_even(finder, all_plus):
    witness = finder.final_k_witness(all_plus, MagicMock(), N0, 154)

    assert witness.case == FinalK(154, 116, 116)
    assert verify_solution(all_plus, witness.solution)

def test_final_k_summands_out_of_range(finder):
    with pytest.raises(InternalContradictionError):
        finder.final_k_witness(MagicMock(), MagicMock(), N0, 2)


# ---------- 完整分派 ----------

def test_all_plus_takes_band_case(all_plus):
    solution, trace = find_monochromatic(all_plus, N0)

    assert solution == Solution(289, 23120, 153, Colour.PLUS)
    assert trace.case == MonochromaticBand(Colour.PLUS)
    assert not trace.flipped

@pytest.mark.parametrize("n", [17, 50, 100])
def test_band_solution_shape(n):
    source = constant_colouring(finder_domain(n), Colour.MINUS)

    solution, _ = find_monochromatic(source, n)

    assert solution.triple == (n * n, 80 * n * n, 9 * n)
    assert n * n + 80 * n * n == (9 * n) ** 2
    assert all(v in finder_domain(n) for v in solution.triple)
    assert solution.colour == Colour.MINUS

def test_low_plus_reaches_pair_sum_k_plus_1(finder, low_plus):
    solution, trace = finder.find_monochromatic(low_plus, N0)

    assert trace.case == PairSumAtKPlus1(160, 161)
    assert solution == Solution(161, 25760, 161, Colour.MINUS)
    assert trace.flipped is False

def test_flipped_orientation_is_recorded(finder, low_plus):
    solution, trace = finder.find_monochromatic(FlippedColouring(low_plus), N0)

    assert trace.flipped is True
    assert solution == Solution(161, 25760, 161, Colour.PLUS)

def test_random_colouring_pair_sum_k(finder):
    source = RandomColouring(finder_domain(N0), 1)

    solution, trace = finder.find_monochromatic(source, N0)

    assert isinstance(trace.case, (PairSumAtK, PairSumAtKPlus1))
    assert verify_solution(source, solution)
    assert finder.check_trace(source, N0, trace)

def test_residue_square_through_dispatch(finder, residue_square_colouring):
    solution, trace = finder.find_monochromatic(residue_square_colouring, N0)

    assert isinstance(trace.case, ResidueSquare)
    assert trace.case.k == 153
    assert trace.case.m == 31
    assert solution.z == 31
    assert verify_solution(residue_square_colouring, solution)
    assert finder.check_trace(residue_square_colouring, N0, trace)

def test_residue_fixture_is_monotone(residue_square_colouring):
    assert certify_monotone_classes(residue_square_colouring, N0, K) == 0

def test_audited_dispatch(residue_square_colouring):
    finder = ProofFinderModule(MonoSquareConfig(audit_monotonicity=True))
    _, trace = finder.find_monochromatic(residue_square_colouring, N0)
    assert trace.case.tag == "residue_square"

def test_queries_stay_in_domain(audit, residue_square_colouring):
    wrapped = audit(residue_square_colouring)

    find_monochromatic(wrapped, N0)

    assert wrapped.lowest >= N0
    assert wrapped.highest <= 154 ** 2 - N0

def test_rejects_small_n():
    with pytest.raises(PreconditionError):
        find_monochromatic(constant_colouring(finder_domain(9), Colour.PLUS), 9)

def test_rejects_wrong_domain():
    with pytest.raises(PreconditionError):
        find_monochromatic(constant_colouring(Interval(17, 10 ** 6), Colour.PLUS), N0)

def test_determinism(finder):
    source = RandomColouring(finder_domain(20), 99)
    assert finder.find_monochromatic(source, 20) == finder.find_monochromatic(source, 20)


# ---------- 轨迹 ----------

def test_trace_round_trip(finder, low_plus):
    _, trace = finder.find_monochromatic(low_plus, N0)

    data = trace.to_dict()

    assert data["case"] == {"tag": "pair_sum_k_plus_1", "k": 160, "i": 161}
    assert ProofTrace.from_dict(data) == trace

def test_case_dict_tags():
    assert case_to_dict(MonochromaticBand(Colour.MINUS)) == {"tag": "monochromatic_band", "band_colour": "-1"}
    assert case_from_dict({"tag": "final_k", "k": 153, "u": 38, "v": 39}) == FinalK(153, 38, 39)
    with pytest.raises(ValueError):
        case_from_dict({"tag": "unknown"})

def test_check_trace_rejects_tampered_solution(finder, low_plus):
    _, trace = finder.find_monochromatic(low_plus, N0)
    tampered = ProofTrace(trace.flipped, trace.case, Solution(17, 25904, 161, Colour.MINUS))

    assert finder.check_trace(low_plus, N0, tampered).reason == "replay"

def test_check_trace_rejects_wrong_orientation(finder, low_plus):
    _, trace = finder.find_monochromatic(low_plus, N0)
    assert finder.check_trace(FlippedColouring(low_plus), N0, trace).reason == "flip"

def test_check_trace_band(finder, all_plus):
    _, trace = finder.find_monochromatic(all_plus, N0)
    assert finder.check_trace(all_plus, N0, trace)


# ---------- 无穷多解 ----------

def test_successive_solutions_are_distinct(finder):
    source = RandomColouring(finder_domain(N0), 5)

    runs = finder.successive_solutions(source, N0, 4)

    assert len(runs) == 4
    triples = [s.triple for s, _ in runs]
    assert len(set(triples)) == 4
    for (s, _), (nxt, _) in zip(runs, runs[1:]):
        assert min(nxt.triple) > min(s.x, s.z)
    for s, _ in runs:
        assert verify_solution(source.with_domain(Interval(min(s.triple), max(s.triple))), s)

def test_successive_solutions_stop_before_overflow(finder):
    source = RandomColouring(finder_domain(4600), 5)
    runs = finder.successive_solutions(source, 4600, 50)
    assert 1 <= len(runs) < 50

def test_successive_solutions_need_unbounded_rule(finder, all_plus):
    with pytest.raises(ConstructionError):
        finder.successive_solutions(all_plus, N0, 3)
