import math
from itertools import product

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import binary_strings
from lcsfluct.bitstrings import BinaryString, gen_pair, make_rng
from lcsfluct.cell_model import (
    OnePercentClass,
    break_up,
    decompose,
    enumerate_admissible_vectors,
    enumerate_optimal_vectors,
    is_breakable,
    lighter_side_ones,
    max_cell_score,
    nonzero_cells,
    one_percent_class,
    score,
    vn_membership,
    vn_threshold,
)
from lcsfluct.errors import ContractError, ResourceError
from lcsfluct.lcs_engine import induced_cell_vector, lcs_backtrace, lcs_length
from lcsfluct.perturbation import flip_deltas


def closed_form_score(x: BinaryString, y: BinaryString, v) -> int:
    """Score of an admissible vector without looking at its boundaries."""
    return len(v) - sum(max(u, 0) for u in v) + min(x.n0, y.n0 + sum(v))


def lex_smallest_boundaries(x: str, y: str, v):
    """Reference boundaries by scanning every (s, t) in lexicographic order."""
    p = q = 0
    out = []
    for u in v:
        hit = None
        for s, t in product(range(p + 1, len(x) + 1), range(q + 1, len(y) + 1)):
            if x[s - 1] == y[t - 1] == "1" and x[p:s].count("0") - y[q:t].count("0") == u:
                hit = (s, t)
                break
        if hit is None:
            return None
        p, q = hit
        out.append(hit)
    return out


def test_alignment_30():
    d = decompose("101010101", "11010001", (0, 1, 0, -1))
    assert d.admissible
    assert d.pi == (1, 3, 5, 9) and d.nu == (1, 2, 4, 8)
    assert d.aligned_zeros == (0, 0, 1, 2) and d.tail_zeros == 0
    assert score(d) == 7


def test_flip_example_cells():
    x, y = "0001000001", "1000010101"
    d = decompose(x, y, (-1, 3))
    assert score(d) == lcs_length(x, y) == 7
    assert d.lighter_ones == (0, 1) and lighter_side_ones(d) == 1


def test_breakup_example():
    x, y = "01001001001001", "01010000010101"
    d = decompose(x, y, (0, 0, 0))
    assert d.pi == (2, 11, 14) and d.nu == (2, 10, 14)
    assert score(d) == 12 == lcs_length(x, y)
    assert lighter_side_ones(d) == 0
    assert is_breakable(x, y, d, 1) is None
    assert is_breakable(x, y, d, 2) == (5, 4)
    w = break_up(x, y, (0, 0, 0), 2, (5, 4))
    assert w == (0, 1, -1, 0)
    assert score(decompose(x, y, w)) == 12
    assert lighter_side_ones(decompose(x, y, w)) == 1


def test_optimal_vector_sets():
    assert enumerate_optimal_vectors("101010101", "11010001") == {(0, 0, 0), (0, 1, 0, -1)}
    assert enumerate_optimal_vectors("0001000001", "1000010101") == {(-1, 3), (2,), (3, -1), (3, 0)}


def test_empty_vector():
    d = decompose("0101", "00", ())
    assert d.admissible and score(d) == 2 and d.n1v == 0 and d.rv == 2


def test_inadmissible_vector():
    d = decompose("0101", "0011", (5,))
    assert not d.admissible
    assert d.pi == (math.inf,)
    with pytest.raises(ContractError):
        score(d)
    d = decompose("11", "11", (0, 0, 0))
    assert not d.admissible and d.pi == (1, 2, math.inf)


@given(binary_strings(9), binary_strings(9), st.lists(st.integers(-3, 3), max_size=4))
def test_greedy_boundaries_are_lexicographically_smallest(x, y, v):
    d = decompose(x, y, v)
    ref = lex_smallest_boundaries(str(x), str(y), v)
    if ref is None:
        assert not d.admissible
    else:
        assert d.admissible
        assert list(zip(d.pi, d.nu)) == ref


@given(binary_strings(8), binary_strings(8))
def test_scores_match_closed_form(x, y):
    for v in enumerate_admissible_vectors(x, y):
        d = decompose(x, y, v)
        assert d.admissible
        assert score(d) == closed_form_score(x, y, v)
        assert d.n1v + d.rv == x.n1 + y.n1
        assert d.n1v >= 2 * len(v)


@given(binary_strings(8), binary_strings(8))
def test_max_score_is_lcs(x, y):
    assert max_cell_score(x, y) == lcs_length(x, y)


@given(binary_strings(30), binary_strings(30))
def test_backtraced_vector_is_optimal(x, y):
    v = induced_cell_vector(x, y, lcs_backtrace(x, y))
    assert score(decompose(x, y, v)) == lcs_length(x, y)


@given(binary_strings(25, 1), binary_strings(25, 1))
def test_lighter_side_flips_raise_the_lcs(x, y):
    v = induced_cell_vector(x, y, lcs_backtrace(x, y))
    d = decompose(x, y, v)
    dx, dy = flip_deltas(x, y)
    for i, u in enumerate(v, 1):
        p0, p1, q0, q1 = d.bounds(i)
        if u > 0:
            assert all(dy[t] == 1 for t in y.one_positions if q0 < t < q1)
        elif u < 0:
            assert all(dx[s] == 1 for s in x.one_positions if p0 < s < p1)


def _all_witnesses(x: BinaryString, y: BinaryString, d, i):
    p0, p1, q0, q1 = d.bounds(i)
    zx, zy = x.zeros_prefix, y.zeros_prefix
    out = []
    for j in x.one_positions:
        for jp in y.one_positions:
            if p0 < j < p1 and q0 < jp < q1 and abs((zx[j] - zx[p0]) - (zy[jp] - zy[q0])) == 1:
                out.append((j, jp))
    return sorted(out)


@given(st.integers(0, 10_000))
def test_breakability_against_brute_force(seed):
    x, y = gen_pair(24, 0.4, make_rng(seed))
    v = induced_cell_vector(x, y, lcs_backtrace(x, y))
    d = decompose(x, y, v)
    base = score(d)
    for i, u in enumerate(v, 1):
        if u != 0:
            with pytest.raises(ContractError):
                is_breakable(x, y, d, i)
            continue
        ws = _all_witnesses(x, y, d, i)
        assert is_breakable(x, y, d, i) == (ws[0] if ws else None)
        for w in ws:
            v2 = break_up(x, y, v, i, w)
            assert len(v2) == len(v) + 1
            assert score(decompose(x, y, v2)) == base


def test_break_up_rejects_bad_witness():
    x, y = "01001001001001", "01010000010101"
    with pytest.raises(ContractError):
        break_up(x, y, (0, 0, 0), 2, (5, 6))
    with pytest.raises(ContractError):
        break_up(x, y, (0, 0, 0), 4, (5, 4))


def test_vn_and_one_percent():
    assert vn_threshold(1000, 0.1) == 1
    assert vn_membership((0, 2, -2), 100, 0.5)
    assert not vn_membership((0, 3, 4), 100, 0.5)
    assert not vn_membership((), 100, 0.5)
    assert vn_membership((), 1, 0)
    assert nonzero_cells((0, 1, 0, -2)) == 2
    assert one_percent_class((0,) * 99 + (1,)) is OnePercentClass.NONZERO_RICH
    assert one_percent_class((0,) * 101 + (1,)) is OnePercentClass.NONZERO_POOR
    assert one_percent_class((0,) * 10) is OnePercentClass.NONZERO_POOR


def test_enumeration_limit():
    with pytest.raises(ResourceError):
        enumerate_admissible_vectors("1" * 11, "1")
