"""Random one-to-zero flips and the coupling chain started from all ones."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional

import numpy as np

from .bitstrings import BinaryString, make_rng
from .errors import ContractError
from .lcs_engine import lcs_length, lcs_rows

STORE_PAIRS_LIMIT = 256


@dataclass(frozen=True)
class FlipOutcome:
    x_tilde: BinaryString
    y_tilde: BinaryString
    flipped: Optional[tuple[str, int]]
    delta_l: int


def _pick_to_site(x: BinaryString, y: BinaryString, pick: int) -> tuple[str, int]:
    if pick < x.n1:
        return "x", x.one_positions[pick]
    return "y", y.one_positions[pick - x.n1]


def flip_random_one(x: BinaryString | str, y: BinaryString | str,
                    stream: np.random.Generator | None = None, pick: int | None = None) -> FlipOutcome:
    """Turn one uniformly chosen one of ``x`` or ``y`` into a zero.

    ``pick`` (0-based over the ones of x, then the ones of y) bypasses the
    stream for deterministic use.
    """
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    total = x.n1 + y.n1
    if total == 0:
        return FlipOutcome(x, y, None, 0)
    if pick is None:
        pick = int(stream.integers(total))
    if not 0 <= pick < total:
        raise ContractError(f"pick {pick} out of range for {total} ones")
    side, pos = _pick_to_site(x, y, pick)
    xt, yt = (x.cleared(pos), y) if side == "x" else (x, y.cleared(pos))
    return FlipOutcome(xt, yt, (side, pos), lcs_length(xt, yt) - lcs_length(x, y))


def _reverse(s: BinaryString) -> BinaryString:
    return BinaryString.from_bits(s.array[::-1])


def _one_side_flip_lengths(x: BinaryString, y: BinaryString) -> dict[int, int]:
    """LCS after clearing each one of ``x``, from prefix and suffix DP rows."""
    ones = x.one_positions
    if not ones:
        return {}
    n, m = x.n, y.n
    fwd = lcs_rows(x, y, [i - 1 for i in ones])
    bwd = lcs_rows(_reverse(x), _reverse(y), [n - i for i in ones])
    head = np.stack([fwd[i - 1] for i in ones])
    # tail[:, j] = LCS(x[i+1..n], y[j+1..m])
    tail = np.stack([bwd[n - i][::-1] for i in ones])
    best = (head + tail).max(axis=1)
    y_zero = y.array == 0
    if y_zero.any():
        matched = (head[:, :-1] + 1 + tail[:, 1:])[:, y_zero].max(axis=1)
        best = np.maximum(best, matched)
    return {i: int(b) for i, b in zip(ones, best)}


def flip_deltas(x: BinaryString | str, y: BinaryString | str) -> tuple[dict[int, int], dict[int, int]]:
    """LCS change for every single flip: ``({pos: delta} for x, {pos: delta} for y)``."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    base = lcs_length(x, y)
    dx = {i: v - base for i, v in _one_side_flip_lengths(x, y).items()}
    dy = {j: v - base for j, v in _one_side_flip_lengths(y, x).items()}
    return dx, dy


def drift_probabilities_exact(x: BinaryString | str, y: BinaryString | str) -> tuple[Fraction, Fraction, Fraction]:
    """``(P(+1), P(0), P(-1))`` of the LCS increment under a uniform flip, as exact fractions."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    total = x.n1 + y.n1
    if total == 0:
        raise ContractError("drift is undefined when neither text holds a one")
    dx, dy = flip_deltas(x, y)
    counts = Counter(dx.values()) + Counter(dy.values())
    if set(counts) - {-1, 0, 1}:
        raise AssertionError(f"single flip moved the LCS by more than one: {counts}")
    return Fraction(counts[1], total), Fraction(counts[0], total), Fraction(counts[-1], total)


@dataclass
class CouplingChain:
    """States ``(X^k, Y^k)`` for ``k = 2n .. 0`` and the LCS trajectory ``L(k)``.

    ``pairs[k]`` and ``l_traj[k]`` are indexed by the number of ones ``k``;
    ``pairs`` is ``None`` in streaming mode and ``l_traj[k]`` is ``None`` at
    levels that were not requested.  ``flips[k]`` is the site cleared on the
    way from level ``k`` to ``k - 1``.
    """

    n: int
    seed: int
    l_traj: list
    flips: list
    pairs: Optional[list] = None
    levels: frozenset = field(default_factory=frozenset)


def build_chain(n: int, seed: int, levels: Iterable[int] | None = None,
                store_pairs: bool | None = None) -> CouplingChain:
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    want = frozenset(range(2 * n + 1)) if levels is None else frozenset(k for k in levels if 0 <= k <= 2 * n)
    if store_pairs is None:
        store_pairs = n <= STORE_PAIRS_LIMIT
    rng = make_rng(seed)
    full = (1 << n) - 1
    px = py = full
    remaining = [("x", p) for p in range(1, n + 1)] + [("y", p) for p in range(1, n + 1)]
    l_traj: list = [None] * (2 * n + 1)
    flips: list = [None] * (2 * n + 1)
    pairs: Optional[list] = [None] * (2 * n + 1) if store_pairs else None

    for k in range(2 * n, -1, -1):
        if k in want or store_pairs:
            xs, ys = BinaryString(px, n), BinaryString(py, n)
            if store_pairs:
                pairs[k] = (xs, ys)
            if k in want:
                l_traj[k] = lcs_length(xs, ys)
        if k == 0:
            break
        r = int(rng.integers(k))
        site = remaining[r]
        remaining[r] = remaining[-1]
        remaining.pop()
        flips[k] = site
        if site[0] == "x":
            px ^= 1 << (site[1] - 1)
        else:
            py ^= 1 << (site[1] - 1)
    return CouplingChain(n, seed, l_traj, flips, pairs, want)


def chain_law_exact(n: int) -> dict[int, dict[tuple[str, str], Fraction]]:
    """Exact law of ``(X^k, Y^k)`` for every ``k``, by propagating over all flip paths."""
    start = ("1" * n, "1" * n)
    law = {2 * n: {start: Fraction(1)}}
    for k in range(2 * n, 0, -1):
        nxt: dict[tuple[str, str], Fraction] = {}
        for (x, y), p in law[k].items():
            share = p / k
            for side, s in (("x", x), ("y", y)):
                for idx, c in enumerate(s):
                    if c != "1":
                        continue
                    t = s[:idx] + "0" + s[idx + 1:]
                    key = (t, y) if side == "x" else (x, t)
                    nxt[key] = nxt.get(key, Fraction(0)) + share
        law[k - 1] = nxt
    return law


def conditional_law_exact(n: int, eps: Fraction = Fraction(1, 3)) -> dict[int, dict[tuple[str, str], Fraction]]:
    """Law of two i.i.d. Bernoulli(eps) texts conditioned on the total number of ones."""
    joint: dict[int, dict[tuple[str, str], Fraction]] = {}
    for bits in product("01", repeat=2 * n):
        s = "".join(bits)
        k = s.count("1")
        joint.setdefault(k, {})[(s[:n], s[n:])] = eps ** k * (1 - eps) ** (2 * n - k)
    out = {}
    for k, dist in joint.items():
        z = sum(dist.values())
        out[k] = {key: p / z for key, p in dist.items()}
    return out


def slope_gap(n: int) -> int:
    """``ceil(n ** 0.1)`` computed exactly: the least ``g`` with ``g ** 10 >= n``."""
    g = max(1, int(round(n ** 0.1)) - 1)
    while g ** 10 < n:
        g += 1
    while g > 1 and (g - 1) ** 10 >= n:
        g -= 1
    return g


def slope_interval(n: int, eps: float) -> tuple[int, int]:
    """Integer points of ``[2 eps n - sqrt(2 eps (1-eps) n), 2 eps n + sqrt(...)]`` inside ``[0, 2n]``."""
    half = math.sqrt(2 * eps * (1 - eps) * n)
    lo = max(0, math.ceil(2 * eps * n - half))
    hi = min(2 * n, math.floor(2 * eps * n + half))
    return lo, hi


def slope_levels(n: int, eps: float) -> range:
    """Levels whose ``L`` values a slope report needs (the interval plus one level below)."""
    lo, hi = slope_interval(n, eps)
    return range(max(0, lo - 1), hi + 1)


@dataclass(frozen=True)
class SlopeReport:
    n: int
    eps: float
    interval: tuple[int, int]
    gap: int
    min_decrease_slope: Optional[float]
    increments: dict
    mean_increment: Optional[float]
    degenerate: bool


def slope_statistics(chain: CouplingChain, eps: float, gap: int | None = None) -> SlopeReport:
    """Slope of ``k -> L(k)`` over the interval around ``2 eps n``.

    ``min_decrease_slope`` is the least ``(L(i) - L(j)) / (j - i)`` over
    ``i + gap <= j`` in the interval; increments are ``L(k-1) - L(k)``.
    """
    n = chain.n
    gap = slope_gap(n) if gap is None else gap
    lo, hi = slope_interval(n, eps)
    L = chain.l_traj
    pts = [k for k in range(lo, hi + 1) if L[k] is not None]
    if hi < lo or len(pts) < 2:
        return SlopeReport(n, eps, (lo, hi), gap, None, {}, None, True)
    missing = [k for k in range(lo, hi + 1) if L[k] is None]
    if missing:
        raise ContractError(f"chain lacks L at levels {missing[:5]}...; build it with slope_levels()")
    best = None
    for a, i in enumerate(pts):
        for j in pts[a + 1:]:
            if i + gap <= j:
                s = (L[i] - L[j]) / (j - i)
                best = s if best is None else min(best, s)
    incs = [L[k - 1] - L[k] for k in range(max(lo, 1), hi + 1) if L[k - 1] is not None]
    hist = dict(sorted(Counter(incs).items()))
    mean = sum(incs) / len(incs) if incs else None
    return SlopeReport(n, eps, (lo, hi), gap, best, hist, mean, best is None)


def all_increments(chain: CouplingChain) -> list[int]:
    L = chain.l_traj
    return [L[k - 1] - L[k] for k in range(1, 2 * chain.n + 1) if L[k] is not None and L[k - 1] is not None]
