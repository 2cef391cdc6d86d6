"""Cell-vector representation of alignments between two binary texts.

An alignment that only matches equal symbols is described by the pairs of
ones it aligns; between consecutive pairs the maximal number of zeros is
aligned.  A cell vector ``v`` lists, per cell, the zeros of the x-part minus
the zeros of the y-part.  :func:`decompose` realises ``v`` greedily (the
lexicographically smallest closing pair of ones for every cell), and
:func:`score` gives the length of the common subsequence it defines.

Cells and witnesses are numbered from 1, positions are 1-based, and a
boundary of 0 stands for "before the first symbol".
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .bitstrings import BinaryString
from .errors import ContractError, ResourceError
from .lcs_engine import lcs_length

CellVector = tuple[int, ...]

DEFAULT_ENUMERATION_BOUND = 10


def as_fraction(value) -> Fraction:
    """Exact rational for a parameter; floats are read through their repr (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class CellDecomposition:
    v: CellVector
    pi: tuple
    nu: tuple
    admissible: bool
    zeros_x: Optional[tuple[int, ...]] = None
    zeros_y: Optional[tuple[int, ...]] = None
    aligned_zeros: Optional[tuple[int, ...]] = None
    tail_zeros: Optional[int] = None
    lighter_ones: Optional[tuple[int, ...]] = None
    n1v: Optional[int] = None
    rv: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.v)

    def bounds(self, i: int) -> tuple[int, int, int, int]:
        """``(pi(i-1), pi(i), nu(i-1), nu(i))`` for cell ``i``."""
        p0 = self.pi[i - 2] if i > 1 else 0
        q0 = self.nu[i - 2] if i > 1 else 0
        return p0, self.pi[i - 1], q0, self.nu[i - 1]


def _first_one_with_zero_count(ones: Sequence[int], zeros_at_ones: Sequence[int], after: int, target: int) -> Optional[int]:
    lo = bisect_right(ones, after)
    k = bisect_left(zeros_at_ones, target, lo)
    if k < len(ones) and zeros_at_ones[k] == target:
        return ones[k]
    return None


def decompose(x: BinaryString | str, y: BinaryString | str, v: Sequence[int]) -> CellDecomposition:
    """Boundaries, aligned zeros and one counts of the alignment encoded by ``v``."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    v = tuple(int(u) for u in v)
    zx, zy = x.zeros_prefix, y.zeros_prefix
    ones_x, ones_y = x.one_positions, y.one_positions
    zy_ones = [int(zy[t]) for t in ones_y]
    max_zy = zy_ones[-1] if zy_ones else -1

    pi: list = []
    nu: list = []
    p = q = 0
    for vi in v:
        hit = None
        for s in ones_x[bisect_right(ones_x, p):]:
            target = int(zy[q] + (zx[s] - zx[p]) - vi)
            if target > max_zy:
                break
            if target < zy[q]:
                continue
            t = _first_one_with_zero_count(ones_y, zy_ones, q, target)
            if t is not None:
                hit = (s, t)
                break
        if hit is None:
            pad = len(v) - len(pi)
            return CellDecomposition(v, tuple(pi) + (math.inf,) * pad, tuple(nu) + (math.inf,) * pad, False)
        p, q = hit
        pi.append(p)
        nu.append(q)

    zeros_x, zeros_y, aligned, lighter = [], [], [], []
    p0 = q0 = 0
    for vi, p, q in zip(v, pi, nu):
        cx, cy = int(zx[p] - zx[p0]), int(zy[q] - zy[q0])
        zeros_x.append(cx)
        zeros_y.append(cy)
        aligned.append(min(cx, cy))
        if vi > 0:
            lighter.append((q - q0 - 1) - int(zy[q - 1] - zy[q0]))
        elif vi < 0:
            lighter.append((p - p0 - 1) - int(zx[p - 1] - zx[p0]))
        else:
            lighter.append(0)
        p0, q0 = p, q
    tail = min(x.n0 - int(zx[p0]), y.n0 - int(zy[q0]))
    n1v = (p0 - int(zx[p0])) + (q0 - int(zy[q0]))
    return CellDecomposition(
        v, tuple(pi), tuple(nu), True,
        zeros_x=tuple(zeros_x), zeros_y=tuple(zeros_y), aligned_zeros=tuple(aligned),
        tail_zeros=tail, lighter_ones=tuple(lighter), n1v=n1v, rv=x.n1 + y.n1 - n1v,
    )


def _require_admissible(d: CellDecomposition) -> None:
    if not d.admissible:
        raise ContractError(f"cell vector {d.v} is not admissible for these texts")


def score(d: CellDecomposition) -> int:
    """Aligned ones plus aligned zeros inside cells plus aligned tail zeros."""
    _require_admissible(d)
    return d.k + sum(d.aligned_zeros) + d.tail_zeros


def lighter_side_ones(d: CellDecomposition) -> int:
    """Ones strictly inside cells, on the side holding fewer zeros."""
    _require_admissible(d)
    return sum(d.lighter_ones)


def _witness_diff(x: BinaryString, y: BinaryString, d: CellDecomposition, i: int, j: int, jp: int) -> Optional[int]:
    """Zero-count offset of ``(j, j')`` inside cell ``i`` if it is a valid witness, else None."""
    p0, p1, q0, q1 = d.bounds(i)
    if not (p0 < j < p1 and q0 < jp < q1):
        return None
    if x[j - 1] != 1 or y[jp - 1] != 1:
        return None
    diff = int((x.zeros_prefix[j] - x.zeros_prefix[p0]) - (y.zeros_prefix[jp] - y.zeros_prefix[q0]))
    return diff if abs(diff) == 1 else None


def is_breakable(x: BinaryString | str, y: BinaryString | str, d: CellDecomposition, i: int) -> Optional[tuple[int, int]]:
    """Lexicographically smallest quasi-aligned pair of interior ones in 0-cell ``i``, if any."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    _require_admissible(d)
    if not 1 <= i <= d.k:
        raise ContractError(f"cell index {i} out of range 1..{d.k}")
    if d.v[i - 1] != 0:
        raise ContractError(f"cell {i} is a {d.v[i - 1]}-cell; only 0-cells are broken up")
    p0, p1, q0, q1 = d.bounds(i)
    zx, zy = x.zeros_prefix, y.zeros_prefix
    inner_y = [t for t in y.one_positions if q0 < t < q1]
    inner_zy = [int(zy[t] - zy[q0]) for t in inner_y]
    for j in x.one_positions:
        if j <= p0:
            continue
        if j >= p1:
            break
        zrel = int(zx[j] - zx[p0])
        best = None
        for target in (zrel - 1, zrel + 1):
            k = bisect_left(inner_zy, target)
            if k < len(inner_y) and inner_zy[k] == target:
                best = inner_y[k] if best is None else min(best, inner_y[k])
        if best is not None:
            return j, best
    return None


def break_up(x: BinaryString | str, y: BinaryString | str, v: Sequence[int], i: int, witness: tuple[int, int]) -> CellVector:
    """Split 0-cell ``i`` of ``v`` at ``witness`` into a (+1, -1) or (-1, +1) pair."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    v = tuple(v)
    d = decompose(x, y, v)
    _require_admissible(d)
    if not 1 <= i <= d.k or v[i - 1] != 0:
        raise ContractError(f"cell {i} is not a 0-cell of {v}")
    diff = _witness_diff(x, y, d, i, *witness)
    if diff is None:
        raise ContractError(f"{witness} is not a break-up witness for cell {i} of {v}")
    return v[: i - 1] + (diff, -diff) + v[i:]


def vn_threshold(n: int, eps) -> Fraction:
    return Fraction(1, 10) * as_fraction(eps) ** 2 * n


def vn_membership(v: Sequence[int], n: int, eps) -> bool:
    """At least 0.1*eps^2*n cells and total absolute offset at most twice the cell count."""
    k = len(v)
    return k >= math.ceil(vn_threshold(n, eps)) and sum(abs(u) for u in v) <= 2 * k


class OnePercentClass(str, enum.Enum):
    NONZERO_RICH = "nonzero_rich"
    NONZERO_POOR = "nonzero_poor"


def nonzero_cells(v: Sequence[int]) -> int:
    return sum(1 for u in v if u != 0)


def one_percent_class(v: Sequence[int]) -> OnePercentClass:
    if 100 * nonzero_cells(v) >= len(v):
        return OnePercentClass.NONZERO_RICH
    return OnePercentClass.NONZERO_POOR


def _check_size(x: BinaryString, y: BinaryString, max_len: int) -> None:
    if x.n > max_len or y.n > max_len:
        raise ResourceError(f"exhaustive enumeration limited to length {max_len}, got {x.n} and {y.n}")


def enumerate_admissible_vectors(x: BinaryString | str, y: BinaryString | str,
                                 max_len: int = DEFAULT_ENUMERATION_BOUND) -> frozenset[CellVector]:
    """Vectors induced by every monotone matching of ones (the empty vector included)."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    _check_size(x, y, max_len)
    ox, oy = (0,) + x.one_positions, (0,) + y.one_positions
    zx, zy = x.zeros_prefix, y.zeros_prefix

    @lru_cache(maxsize=None)
    def suffixes(a: int, b: int) -> frozenset:
        out = {()}
        for a2 in range(a + 1, len(ox)):
            dx = int(zx[ox[a2]] - zx[ox[a]])
            for b2 in range(b + 1, len(oy)):
                vi = dx - int(zy[oy[b2]] - zy[oy[b]])
                out.update((vi,) + rest for rest in suffixes(a2, b2))
        return frozenset(out)

    return suffixes(0, 0)


def enumerate_optimal_vectors(x: BinaryString | str, y: BinaryString | str,
                              max_len: int = DEFAULT_ENUMERATION_BOUND) -> frozenset[CellVector]:
    """Every admissible cell vector whose score equals the LCS length."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    best = lcs_length(x, y)
    return frozenset(v for v in enumerate_admissible_vectors(x, y, max_len) if score(decompose(x, y, v)) == best)


def max_cell_score(x: BinaryString | str, y: BinaryString | str,
                   max_len: int = DEFAULT_ENUMERATION_BOUND) -> int:
    """Best score over all admissible vectors; computed without the DP."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    return max(score(decompose(x, y, v)) for v in enumerate_admissible_vectors(x, y, max_len))
