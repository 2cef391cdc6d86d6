"""Exact oracles for the counting lemmas and the closed-form tail bounds.

Tail probabilities are exact rationals whenever the success probability is
rational (floats are read through their decimal repr), and every comparison
against a transcendental bound is done in mpmath at ``BOUND_DPS`` digits so
that a check cannot flip on rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Mapping, Optional, Sequence

import mpmath
import numpy as np

from .bitstrings import BinaryString, gap_encode
from .cell_model import as_fraction
from .errors import ContractError, ParameterRangeError, PreconditionError

BOUND_DPS = 60
DEFAULT_ENUMERATION_K = 6


@dataclass(frozen=True)
class BoundCheck:
    """One inequality ``exact_value <relation> bound_value`` and whether it held."""

    name: str
    parameters: dict
    exact_value: object
    bound_value: object
    holds: bool
    relation: str = "<="
    secondary_bound: Optional[object] = None


def _mp(value) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def _leq(a, b) -> bool:
    with mpmath.workdps(BOUND_DPS):
        return bool(_mp(a) <= _mp(b))


# -- combinatorics ----------------------------------------------------------

def binomial_coefficient(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        raise ContractError(f"binomial coefficient needs 0 <= k <= n, got n={n}, k={k}")
    return math.comb(n, k)


def l1_ball_count(k: int, radius: int, max_support: int | None = None) -> int:
    """Points of ``Z^k`` with ``sum |v_i| <= radius`` and at most ``max_support`` nonzero entries."""
    top = k if max_support is None else min(k, max_support)
    return sum(2 ** j * math.comb(k, j) * math.comb(radius, j) for j in range(top + 1))


def iter_V(k: int) -> Iterator[tuple[int, ...]]:
    """All ``v`` in ``Z^k`` with ``sum |v_i| <= 2k``."""
    def rec(prefix: tuple[int, ...], budget: int, left: int):
        if left == 0:
            yield prefix
            return
        for u in range(-budget, budget + 1):
            yield from rec(prefix + (u,), budget - abs(u), left - 1)
    yield from rec((), 2 * k, k)


@dataclass(frozen=True)
class VCount:
    k: int
    exact: Optional[int]
    bound: object
    bound_coarse: object = None
    enumerated: bool = True


def count_V(k: int, enumeration_bound: int = DEFAULT_ENUMERATION_K) -> VCount:
    """``|V(k)|`` by enumeration with the bounds ``2^k C(3k, k)`` and ``16^k``."""
    if k < 0:
        raise ContractError("k must be nonnegative")
    exact = sum(1 for _ in iter_V(k)) if k <= enumeration_bound else None
    return VCount(k, exact, 2 ** k * math.comb(3 * k, k), 16 ** k, exact is not None)


def sparse_budget(k: int) -> int:
    """Largest number of nonzero entries allowed by ``I(v) <= 0.01 k``."""
    return (k * 1) // 100


def count_V1pct_complement(k: int, enumeration_bound: int = DEFAULT_ENUMERATION_K) -> VCount:
    """Vectors of ``V(k)`` with at most ``0.01 k`` nonzero entries, and ``exp(0.1262 k)``."""
    if k < 0:
        raise ContractError("k must be nonnegative")
    budget = sparse_budget(k)
    exact = None
    if k <= enumeration_bound:
        exact = sum(1 for v in iter_V(k) if sum(1 for u in v if u) <= budget)
    with mpmath.workdps(BOUND_DPS):
        bound = mpmath.exp(mpmath.mpf("0.1262") * k)
    return VCount(k, exact, bound, None, exact is not None)


def count_V1pct_complement_closed(k: int) -> int:
    return l1_ball_count(k, 2 * k, sparse_budget(k))


# -- geometric and binomial tails -------------------------------------------

def rate_function(t) -> mpmath.mpf:
    """``C(t) = t - 1 - ln t``."""
    with mpmath.workdps(BOUND_DPS):
        t = _mp(t)
        if t <= 0:
            raise ParameterRangeError("rate function needs t > 0")
        return t - 1 - mpmath.log(t)


def binomial_cdf(trials: int, p, upto: int) -> Fraction:
    """Exact ``P(Bin(trials, p) <= upto)``."""
    p = as_fraction(p)
    if upto < 0:
        return Fraction(0)
    if upto >= trials:
        return Fraction(1)
    q = 1 - p
    return sum((math.comb(trials, j) * p ** j * q ** (trials - j) for j in range(upto + 1)), Fraction(0))


def binomial_sf(trials: int, p, atleast: int) -> Fraction:
    """Exact ``P(Bin(trials, p) >= atleast)``."""
    p = as_fraction(p)
    if atleast <= 0:
        return Fraction(1)
    if atleast > trials:
        return Fraction(0)
    q = 1 - p
    return sum((math.comb(trials, j) * p ** j * q ** (trials - j) for j in range(atleast, trials + 1)), Fraction(0))


def geometric_sum_cdf(m: int, p, t: int) -> Fraction:
    """Exact ``P(G_1 + ... + G_m <= t)`` for i.i.d. geometric(p) on ``{1, 2, ...}``."""
    # the m-th success arrives by trial t iff t trials hold at least m successes;
    # the complement has only m terms, which keeps long thresholds cheap
    return 1 - binomial_cdf(t, p, m - 1) if t >= m else Fraction(0)


def geometric_tail_bound(direction: str, param, m: int, p) -> BoundCheck:
    """Large-deviation bound ``exp(-C(param) m)`` for a sum of ``m`` geometric(p) variables.

    ``upper``: ``P(sum > param m / p)`` with ``param > 1``;
    ``lower``: ``P(sum <= param m / p)`` with ``0 < param < 1``.
    """
    if m < 1:
        raise ContractError("m must be a positive integer")
    p_exact = as_fraction(p)
    if not 0 < p_exact < 1:
        raise ParameterRangeError(f"p must lie in (0, 1), got {p}")
    a = as_fraction(param)
    threshold = a * m / p_exact
    cut = math.floor(threshold)
    if direction == "upper":
        if a <= 1:
            raise ContractError(f"upper bound needs A > 1, got {param}")
        exact = 1 - geometric_sum_cdf(m, p_exact, cut)
    elif direction == "lower":
        if not 0 < a < 1:
            raise ContractError(f"lower bound needs 0 < alpha < 1, got {param}")
        exact = geometric_sum_cdf(m, p_exact, cut)
    else:
        raise ContractError(f"direction must be 'upper' or 'lower', got {direction!r}")
    with mpmath.workdps(BOUND_DPS):
        bound = mpmath.exp(-rate_function(a) * m)
    return BoundCheck(f"geometric_{direction}", {"param": param, "m": m, "p": p}, exact, bound, _leq(exact, bound))


def binomial_lower_tail_bound(p, a, m: int) -> BoundCheck:
    """``P(Bin(m, p) < a m)`` against ``(p/a)^{am} ((1-p)/(1-a))^{(1-a)m}`` and ``(p/a)^{am} e^{(a-p)m}``."""
    pf, af = as_fraction(p), as_fraction(a)
    if not (0 < af < pf < 1):
        raise ContractError(f"need 0 < a < p < 1, got a={a}, p={p}")
    exact = binomial_cdf(m, pf, math.ceil(af * m) - 1)
    with mpmath.workdps(BOUND_DPS):
        P, A = _mp(pf), _mp(af)
        sharp = (P / A) ** (A * m) * ((1 - P) / (1 - A)) ** ((1 - A) * m)
        weak = (P / A) ** (A * m) * mpmath.exp((A - P) * m)
        holds = bool(_mp(exact) <= sharp and sharp <= weak)
    return BoundCheck("binomial_lower", {"p": p, "a": a, "m": m}, exact, sharp, holds, secondary_bound=weak)


def extreme_lower_rate_check(log_alpha=-301, target=300) -> BoundCheck:
    """``C(alpha) >= target`` for ``alpha = exp(log_alpha)``, evaluated in log space."""
    with mpmath.workdps(BOUND_DPS):
        la = _mp(log_alpha)
        c = mpmath.exp(la) - 1 - la
        return BoundCheck("extreme_lower_rate", {"log_alpha": log_alpha}, c, _mp(target), bool(c >= target), ">=")


# -- breakability and the constructive bound --------------------------------

def breakability_lower_bound(eps):
    """``q(eps) = 2(1-eps)^2 / (2(1-eps)^2 + 2 - eps^2)``; exact for Fraction input."""
    if not 0 < eps <= 0.5:
        raise ParameterRangeError(f"eps must lie in (0, 0.5], got {eps}")
    a = 2 * (1 - eps) ** 2
    return a / (a + 2 - eps ** 2)


def expected_min_geometric(eps):
    """``E min(xi, eta) = 1 / (1 - eps^2) - 1`` for independent gap counts."""
    if not 0 <= eps < 1:
        raise ParameterRangeError(f"eps must lie in [0, 1), got {eps}")
    return 1 / (1 - eps ** 2) - 1


def greedy_lower_bound_score(x: BinaryString | str, y: BinaryString | str) -> int:
    """Align the i-th zeros of both texts, then the ones that fit between them."""
    gx, gy = gap_encode(x), gap_encode(y)
    z = min(gx.n0, gy.n0)
    if z == 0:
        return 0
    return z + int(np.minimum(np.asarray(gx.gaps[:z]), np.asarray(gy.gaps[:z])).sum())


# -- variance of a map with slope on a scale --------------------------------

def _as_map(f) -> dict[int, int]:
    if isinstance(f, Mapping):
        return {int(k): int(v) for k, v in f.items()}
    return {i: int(v) for i, v in enumerate(f)}


def variance_slope_check(f, c, m: int, dist: Mapping[int, object]) -> BoundCheck:
    """``Var f(B) >= c^2 (1 - 2m / (c sqrt(Var B))) Var B`` for a map meeting both slope conditions."""
    fm = _as_map(f)
    dom = sorted(fm)
    if dom != list(range(dom[0], dom[-1] + 1)):
        raise PreconditionError("f must be defined on an integer interval")
    cf = as_fraction(c)
    if cf <= 0 or m <= 0:
        raise PreconditionError("c and m must be positive")
    for a, i in enumerate(dom):
        for j in dom[a + 1:]:
            rise = fm[j] - fm[i]
            if rise < 0:
                raise PreconditionError(f"f decreases between {i} and {j}")
            if rise > j - i:
                raise PreconditionError(f"f({j}) - f({i}) = {rise} exceeds {j - i}")
            if i + m <= j and rise < cf * (j - i):
                raise PreconditionError(f"f({j}) - f({i}) = {rise} is below c*(j-i) = {cf * (j - i)}")
    probs = {int(k): as_fraction(v) for k, v in dist.items() if as_fraction(v) != 0}
    if sum(probs.values()) != 1:
        raise PreconditionError("distribution of B must sum to one")
    if set(probs) - set(fm):
        raise PreconditionError("B takes values outside the domain of f")

    def var(g) -> Fraction:
        mean = sum(p * g(k) for k, p in probs.items())
        return sum(p * (g(k) - mean) ** 2 for k, p in probs.items())

    var_b = var(lambda k: k)
    var_f = var(lambda k: fm[k])
    if var_b == 0:
        raise PreconditionError("B is degenerate (zero variance)")
    with mpmath.workdps(BOUND_DPS):
        vb, cc = _mp(var_b), _mp(cf)
        bound = cc ** 2 * (1 - 2 * m / (cc * mpmath.sqrt(vb))) * vb
        holds = bool(_mp(var_f) >= bound)
    return BoundCheck("variance_slope", {"c": c, "m": m}, var_f, bound, holds, ">=")


def random_staircase(length: int, c, m: int, rng: np.random.Generator, p_step: float = 0.75,
                     max_tries: int = 10_000) -> list[int]:
    """Random nondecreasing 0/1-increment map on ``0..length`` meeting the slope condition."""
    cf = as_fraction(c)
    for _ in range(max_tries):
        steps = (rng.random(length) < p_step).astype(int)
        f = np.concatenate(([int(rng.integers(0, 5))], steps)).cumsum()
        ok = all(f[j] - f[i] >= cf * (j - i)
                 for i in range(length + 1) for j in range(i + m, length + 1))
        if ok:
            return [int(v) for v in f]
    raise RuntimeError("could not draw an admissible staircase")


# -- suites -----------------------------------------------------------------

P_GRID = tuple(Fraction(k, 10) for k in range(1, 10))
A_GRID = (Fraction(3, 2), Fraction(2), Fraction(4))
ALPHA_GRID = (Fraction(3, 10), Fraction(6, 10), Fraction(9, 10))
M_GRID = tuple(range(1, 51))


def appendix_suite(p_grid=P_GRID, a_grid=A_GRID, alpha_grid=ALPHA_GRID, m_grid=M_GRID) -> list[BoundCheck]:
    out = []
    for p, m in product(p_grid, m_grid):
        out += [geometric_tail_bound("upper", a, m, p) for a in a_grid]
        out += [geometric_tail_bound("lower", al, m, p) for al in alpha_grid]
    out.append(extreme_lower_rate_check())
    return out


def binomial_suite(p_grid=P_GRID, m_grid=M_GRID) -> list[BoundCheck]:
    out = [binomial_lower_tail_bound(p, p / 2, m) for p, m in product(p_grid, m_grid)]
    out.append(binomial_lower_tail_bound(Fraction(2, 9), Fraction(1, 100), 99))
    return out


def counting_suite(ks: Sequence[int] = range(0, DEFAULT_ENUMERATION_K + 1)) -> list[BoundCheck]:
    out = []
    for k in ks:
        c = count_V(k)
        out.append(BoundCheck("count_V", {"k": k}, c.exact, c.bound,
                              c.exact <= c.bound <= c.bound_coarse))
        c1 = count_V1pct_complement(k)
        out.append(BoundCheck("count_V1pct_complement", {"k": k}, c1.exact, c1.bound, _leq(c1.exact, c1.bound)))
    return out


def slope_lemma_suite(n_maps: int = 1000, seed: int = 0, length: int = 20,
                      c=Fraction(1, 2), m: int = 3) -> list[BoundCheck]:
    from .bitstrings import make_rng

    rng = make_rng(seed)
    uniform = {k: Fraction(1, length + 1) for k in range(length + 1)}
    return [variance_slope_check(random_staircase(length, c, m, rng), c, m, uniform) for _ in range(n_maps)]


SUITES = {
    "appendix": appendix_suite,
    "binomial": binomial_suite,
    "counting": counting_suite,
    "slope": slope_lemma_suite,
}


def default_bounds_suite() -> list[BoundCheck]:
    return [chk for build in SUITES.values() for chk in build()]
