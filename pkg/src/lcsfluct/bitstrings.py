"""Binary texts, their gap encoding, and reproducible random streams.

Positions handed to or returned from the cell-model API (matchings, cell
boundaries, flip sites) are 1-based; ``BinaryString.__getitem__`` follows the
usual 0-based Python convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterRangeError


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Substream for ``(seed, *keys)``; a pure function of its arguments."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(keys))))


@dataclass(frozen=True)
class BinaryString:
    """A 0/1 text packed into an int (bit ``i`` holds symbol ``i``)."""

    packed: int
    n: int
    n1: int = field(default=-1)

    def __post_init__(self):
        if self.n < 0 or self.packed < 0 or self.packed >> self.n:
            raise ValueError("packed value does not fit in n bits")
        ones = self.packed.bit_count()
        if self.n1 == -1:
            object.__setattr__(self, "n1", ones)
        elif self.n1 != ones:
            raise ValueError(f"n1={self.n1} but string has {ones} ones")

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray) -> "BinaryString":
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8)
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        packed = int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")
        return cls(packed, int(arr.size))

    @classmethod
    def from_str(cls, s: str) -> "BinaryString":
        if set(s) - {"0", "1"}:
            raise ValueError(f"not a binary string: {s!r}")
        return cls(int(s[::-1], 2) if s else 0, len(s))

    @classmethod
    def coerce(cls, s: "BinaryString | str | Sequence[int]") -> "BinaryString":
        if isinstance(s, BinaryString):
            return s
        if isinstance(s, str):
            return cls.from_str(s)
        return cls.from_bits(s)

    @property
    def n0(self) -> int:
        return self.n - self.n1

    @cached_property
    def array(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.packed.to_bytes(nbytes, "little"), dtype=np.uint8)
        arr = np.unpackbits(raw, bitorder="little")[: self.n].copy()
        arr.flags.writeable = False
        return arr

    @cached_property
    def one_positions(self) -> tuple[int, ...]:
        """1-based positions of the ones, increasing."""
        return tuple(int(i) + 1 for i in np.flatnonzero(self.array))

    @cached_property
    def zeros_prefix(self) -> np.ndarray:
        """``zeros_prefix[p]`` = number of zeros among positions ``1..p``."""
        out = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(1 - self.array.astype(np.int64), out=out[1:])
        out.flags.writeable = False
        return out

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.n
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.packed >> i) & 1

    def __str__(self) -> str:
        return format(self.packed, f"0{self.n}b")[::-1] if self.n else ""

    def __repr__(self) -> str:
        return f"BinaryString({str(self)!r})"

    def cleared(self, pos: int) -> "BinaryString":
        """Copy with the one at 1-based ``pos`` turned into a zero."""
        bit = 1 << (pos - 1)
        if not self.packed & bit:
            raise ValueError(f"position {pos} does not hold a one")
        return BinaryString(self.packed ^ bit, self.n, self.n1 - 1)


@dataclass(frozen=True)
class GapEncoding:
    """Counts of ones immediately preceding each zero, plus trailing ones."""

    gaps: tuple[int, ...]
    tail_ones: int = 0

    @property
    def n0(self) -> int:
        return len(self.gaps)

    @property
    def n1(self) -> int:
        return sum(self.gaps) + self.tail_ones


def gen_string(n: int, eps: float, stream: np.random.Generator) -> BinaryString:
    """I.i.d. Bernoulli(eps) text of length ``n``."""
    if not 0 <= eps <= 0.5:
        raise ParameterRangeError(f"eps must lie in [0, 0.5], got {eps}")
    if n < 1:
        raise ParameterRangeError(f"n must be a positive integer, got {n}")
    return BinaryString.from_bits((stream.random(n) < eps).astype(np.uint8))


def gen_pair(n: int, eps: float, stream: np.random.Generator) -> tuple[BinaryString, BinaryString]:
    return gen_string(n, eps, stream), gen_string(n, eps, stream)


def gap_encode(s: BinaryString | str) -> GapEncoding:
    s = BinaryString.coerce(s)
    zeros = np.flatnonzero(s.array == 0)
    if zeros.size == 0:
        return GapEncoding((), s.n)
    prev = np.concatenate(([-1], zeros[:-1]))
    gaps = tuple(int(g) for g in zeros - prev - 1)
    return GapEncoding(gaps, int(s.n - 1 - zeros[-1]))


def gap_decode(g: GapEncoding) -> BinaryString:
    parts = ["1" * k + "0" for k in g.gaps]
    parts.append("1" * g.tail_ones)
    return BinaryString.from_str("".join(parts))
