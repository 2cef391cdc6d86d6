"""Exact LCS length, DP rows/tables, backtrace, and induced cell vectors.

The fast path is the bit-parallel row recurrence on Python ints
(``U = V & M[c]; V = (V + U) | (V - U)``): bit ``b`` of ``V`` is set iff the
DP row does not increase between columns ``b`` and ``b + 1``.  The plain
quadratic table in :func:`lcs_length_dp` is kept as the reference it is
tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .bitstrings import BinaryString
from .errors import ContractError


def _symbols(s) -> list:
    if isinstance(s, BinaryString):
        return s.array.tolist()
    if isinstance(s, (bytes, bytearray)):
        return list(s)
    return list(s)


def _masks(y) -> tuple[dict[Hashable, int], int]:
    if isinstance(y, BinaryString):
        full = (1 << y.n) - 1
        return {1: y.packed, 0: full ^ y.packed}, y.n
    masks: dict[Hashable, int] = {}
    ys = _symbols(y)
    for j, c in enumerate(ys):
        masks[c] = masks.get(c, 0) | (1 << j)
    return masks, len(ys)


def _bit_rows(x, y, keep: Iterable[int] | None = None):
    """Yield ``(a, V)`` after each prefix ``x[:a]``; only ``a`` in ``keep`` if given."""
    masks, m = _masks(y)
    full = (1 << m) - 1
    want = None if keep is None else set(keep)
    V = full
    if want is None or 0 in want:
        yield 0, V
    for a, c in enumerate(_symbols(x), start=1):
        U = V & masks.get(c, 0)
        V = ((V + U) | (V - U)) & full
        if want is None or a in want:
            yield a, V


def _row_from_bits(V: int, m: int) -> np.ndarray:
    nbytes = (m + 7) // 8
    bits = np.unpackbits(np.frombuffer(V.to_bytes(nbytes, "little"), dtype=np.uint8), bitorder="little")[:m]
    row = np.zeros(m + 1, dtype=np.int32)
    np.cumsum(1 - bits.astype(np.int32), out=row[1:])
    return row


def lcs_length(x, y) -> int:
    """Length of a longest common subsequence (any hashable alphabet)."""
    _, m = _masks(y)
    V = (1 << m) - 1
    for _, V in _bit_rows(x, y):
        pass
    return m - V.bit_count()


def lcs_length_dp(x, y) -> int:
    """Classical O(|x||y|) dynamic program; reference for the fast path."""
    xs, ys = _symbols(x), _symbols(y)
    prev = [0] * (len(ys) + 1)
    for a in xs:
        cur = [0]
        for j, b in enumerate(ys):
            cur.append(prev[j] + 1 if a == b else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def lcs_rows(x, y, rows: Iterable[int]) -> dict[int, np.ndarray]:
    """DP rows ``P[a][0..|y|]`` (``P[a][b]`` = LCS of ``x[:a]`` and ``y[:b]``) for ``a`` in ``rows``."""
    _, m = _masks(y)
    return {a: _row_from_bits(V, m) for a, V in _bit_rows(x, y, rows)}


def lcs_table(x, y) -> np.ndarray:
    """Full ``(|x|+1) x (|y|+1)`` prefix DP table."""
    _, m = _masks(y)
    n = len(_symbols(x))
    table = np.empty((n + 1, m + 1), dtype=np.int32)
    for a, V in _bit_rows(x, y):
        table[a] = _row_from_bits(V, m)
    return table


@dataclass(frozen=True)
class Matching:
    """Aligned index pairs ``(i, j)``, 1-based, increasing in both coordinates."""

    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def check(self, x, y) -> None:
        xs, ys = _symbols(x), _symbols(y)
        pi = pj = 0
        for i, j in self.pairs:
            if not (pi < i <= len(xs) and pj < j <= len(ys)):
                raise ContractError(f"pair {(i, j)} breaks monotonicity or bounds")
            if xs[i - 1] != ys[j - 1]:
                raise ContractError(f"pair {(i, j)} aligns different symbols")
            pi, pj = i, j


def lcs_backtrace(x, y) -> Matching:
    """One optimal matching; ties resolved toward the largest indices."""
    xs, ys = _symbols(x), _symbols(y)
    table = lcs_table(x, y)
    i, j = len(xs), len(ys)
    pairs = []
    while i > 0 and j > 0:
        if xs[i - 1] == ys[j - 1]:
            pairs.append((i, j))
            i -= 1
            j -= 1
        elif table[i - 1, j] == table[i, j]:
            i -= 1
        else:
            j -= 1
    return Matching(tuple(reversed(pairs)))


def induced_cell_vector(x: BinaryString | str, y: BinaryString | str, m: Matching) -> tuple[int, ...]:
    """Per-cell zero-count differences of the one-pairs of ``m``."""
    x, y = BinaryString.coerce(x), BinaryString.coerce(y)
    m.check(x, y)
    zx, zy = x.zeros_prefix, y.zeros_prefix
    v = []
    p0 = q0 = 0
    for p, q in m.pairs:
        if x[p - 1] == 1:
            v.append(int((zx[p] - zx[p0]) - (zy[q] - zy[q0])))
            p0, q0 = p, q
    return tuple(v)


def matching_from_alignment(top: str, bottom: str, gap: str = "-") -> Matching:
    """Matching read off a two-row alignment display (gaps marked by ``gap``)."""
    if len(top) != len(bottom):
        raise ValueError("alignment rows differ in length")
    i = j = 0
    pairs = []
    for a, b in zip(top, bottom):
        if a != gap:
            i += 1
        if b != gap:
            j += 1
        if a != gap and b != gap:
            pairs.append((i, j))
    return Matching(tuple(pairs))


def strip_gaps(row: str, gap: str = "-") -> str:
    return row.replace(gap, "")


def common_subsequence(x: Sequence, m: Matching) -> list:
    xs = _symbols(x)
    return [xs[i - 1] for i, _ in m.pairs]
