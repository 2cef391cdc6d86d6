import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import gammainc

from conftest import binary_strings, bits
from lcsfluct.bitstrings import BinaryString, GapEncoding, gap_decode, gap_encode, gen_pair, gen_string, make_rng
from lcsfluct.errors import ParameterRangeError


@given(bits())
def test_str_roundtrip(s):
    b = BinaryString.from_str(s)
    assert str(b) == s
    assert b.n == len(s) and b.n1 == s.count("1") and b.n0 == s.count("0")
    assert BinaryString.from_bits([int(c) for c in s]) == b
    assert b.array.tolist() == [int(c) for c in s]


@given(binary_strings())
def test_gap_roundtrip(b):
    g = gap_encode(b)
    assert gap_decode(g) == b
    assert g.n0 == b.n0 and g.n1 == b.n1


def test_gap_example():
    # ones before each zero: 0 1 1 0 0 0 1 0 0
    g = gap_encode("011000100")
    assert g == GapEncoding((0, 2, 0, 0, 1, 0), 0)
    assert gap_encode("1101") == GapEncoding((2,), 1)
    assert gap_encode("") == GapEncoding((), 0)


@given(binary_strings(min_size=1))
def test_one_positions_and_zero_prefix(b):
    s = str(b)
    assert b.one_positions == tuple(i + 1 for i, c in enumerate(s) if c == "1")
    assert b.zeros_prefix.tolist() == [s[:p].count("0") for p in range(len(s) + 1)]


@given(binary_strings(min_size=1), st.data())
def test_cleared(b, data):
    if not b.n1:
        return
    pos = data.draw(st.sampled_from(b.one_positions))
    c = b.cleared(pos)
    assert c.n1 == b.n1 - 1 and c[pos - 1] == 0
    with pytest.raises(ValueError):
        c.cleared(pos)


def test_invalid_construction():
    with pytest.raises(ValueError):
        BinaryString.from_str("012")
    with pytest.raises(ValueError):
        BinaryString(8, 3)
    with pytest.raises(ValueError):
        BinaryString(3, 2, n1=1)


def test_gen_string_ranges():
    rng = make_rng(0)
    with pytest.raises(ParameterRangeError):
        gen_string(10, 0.6, rng)
    with pytest.raises(ParameterRangeError):
        gen_string(10, -0.1, rng)
    with pytest.raises(ParameterRangeError):
        gen_string(0, 0.3, rng)
    assert gen_string(50, 0.0, rng).n1 == 0


def test_streams_are_pure_functions_of_keys():
    a = gen_pair(200, 0.3, make_rng(5, 2))
    b = gen_pair(200, 0.3, make_rng(5, 2))
    c = gen_pair(200, 0.3, make_rng(5, 3))
    assert a == b and a != c


def test_symbol_frequency():
    s = gen_string(200_000, 0.3, make_rng(11))
    se = np.sqrt(0.3 * 0.7 / s.n)
    assert abs(s.n1 / s.n - 0.3) < 4 * se


def test_gap_counts_are_geometric():
    eps, samples = 0.3, 100_000
    s = gen_string(int(samples / (1 - eps) * 1.05), eps, make_rng(21))
    gaps = np.asarray(gap_encode(s).gaps[:samples])
    assert gaps.size == samples
    top = 6
    observed = np.array([np.sum(gaps == j) for j in range(top)] + [np.sum(gaps >= top)])
    probs = np.array([eps ** j * (1 - eps) for j in range(top)] + [eps ** top])
    expected = probs * samples
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    # seven bins, six degrees of freedom: upper regularized gamma Q(3, chi2 / 2)
    p_value = float(gammainc(top / 2, chi2 / 2, float("inf"), regularized=True))
    assert p_value > 1e-3, (chi2, p_value)
