"""Randomness extractors and digital mixing.

Implements the classical von Neumann pair rule, an enumerative
stream-numbering extractor over fixed-length blocks, and positional
replacement of a base stream's bits with bits from a second source.

The stream-numbering extractor ranks each length-n block among all
arrangements of its Hamming weight k, splits the rank space
[0, C(n,k)-1] into power-of-two blocks given by the set bits of C(n,k),
and emits the low b_j bits of the rank, where b_j is the exponent of
the block the rank falls in.  Every block therefore maps uniformly onto
its output width, so unbiased inputs stay unbiased.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bitstream import BitSequence
from .errors import DomainError, InsufficientQuantumBits, LengthMismatch

MAX_CODEC_N = 1024
_INT64_SAFE_N = 64  # C(64, 32) still fits in signed 64-bit


@dataclass(frozen=True)
class ExtractionStats:
    """Input/output accounting for one extraction pass.

    ``discarded_bits`` counts every input bit that did not survive to
    the output, including any unprocessed trailing remainder.
    """

    input_bits: int
    output_bits: int
    discarded_bits: int
    yield_ratio: float

    def as_dict(self) -> dict:
        return {
            "input_bits": self.input_bits,
            "output_bits": self.output_bits,
            "discarded_bits": self.discarded_bits,
            "yield": self.yield_ratio,
        }


def _stats(input_bits: int, output_bits: int) -> ExtractionStats:
    return ExtractionStats(
        input_bits=input_bits,
        output_bits=output_bits,
        discarded_bits=input_bits - output_bits,
        yield_ratio=output_bits / input_bits if input_bits else 0.0,
    )


# -- von Neumann ----------------------------------------------------------


def von_neumann(seq: BitSequence) -> tuple[BitSequence, ExtractionStats]:
    """Classical debiasing pair rule: 01 -> 0, 10 -> 1, 00/11 -> nothing.

    Pairs are non-overlapping; an odd trailing bit is dropped.
    """
    arr = seq.array
    m = arr.size // 2
    first = arr[0 : 2 * m : 2]
    second = arr[1 : 2 * m : 2]
    out = first[first != second]
    return BitSequence.from_array(out), _stats(arr.size, int(out.size))


# -- binomial coefficients -------------------------------------------------


def binomial(r: int, m: int, mode: str = "exact"):
    """C(r, m) exactly (integer) or via the log-Gamma approximation (float)."""
    if r < 0 or m < 0 or m > r:
        raise DomainError(f"binomial requires 0 <= m <= r, got r={r}, m={m}")
    if mode == "exact":
        return math.comb(r, m)
    if mode == "approximate":
        return math.exp(
            math.lgamma(r + 1) - math.lgamma(m + 1) - math.lgamma(r - m + 1)
        )
    raise ValueError(f"unknown mode {mode!r}; expected 'exact' or 'approximate'")


def block_decompose(n: int, k: int) -> list[int]:
    """Exponents of the set bits of C(n, k), in increasing order."""
    if k < 0 or k > n:
        raise DomainError(f"block_decompose requires 0 <= k <= n, got n={n}, k={k}")
    c = math.comb(n, k)
    return [i for i in range(c.bit_length()) if (c >> i) & 1]


# -- stream-numbering codec -------------------------------------------------


class BabkinCodec:
    """Precomputed enumeration state for blocks of length ``n``.

    Holds an exact Pascal-triangle table of binomial coefficients and,
    for every weight k, the power-of-two block decomposition of C(n, k)
    with its prefix sums.  Instances are immutable and shareable.
    Memory grows roughly as n^2 big integers (a few MB at n = 300,
    tens of MB at the n = 1024 ceiling).
    """

    def __init__(self, n: int):
        if not 2 <= n <= MAX_CODEC_N:
            raise DomainError(f"codec block length must be in [2, {MAX_CODEC_N}]")
        self.n = n
        rows: list[list[int]] = [[1]]
        for r in range(1, n + 1):
            prev = rows[-1]
            row = [1] + [prev[m - 1] + prev[m] for m in range(1, r)] + [1]
            rows.append(row)
        self.binomials = rows
        self.blocks: list[tuple[int, ...]] = []
        self._prefix: list[list[int]] = []
        for k in range(n + 1):
            exps = block_decompose(n, k)
            self.blocks.append(tuple(exps))
            prefix = []
            acc = 0
            for b in exps:
                acc += 1 << b
                prefix.append(acc)
            self._prefix.append(prefix)
        self._fast = _FastTables(self) if n <= _INT64_SAFE_N else None

    def binomial(self, r: int, m: int) -> int:
        if r < 0 or m < 0:
            raise DomainError("binomial indices must be non-negative")
        if m > r:
            return 0
        return self.binomials[r][m]

    def number(self, subseq: BitSequence | np.ndarray) -> int:
        """Rank of the block among all arrangements of its weight."""
        arr = subseq.array if isinstance(subseq, BitSequence) else np.asarray(subseq)
        if arr.size != self.n:
            raise LengthMismatch(
                f"subsequence holds {arr.size} bits, codec expects {self.n}"
            )
        total = 0
        for rank, col in enumerate(np.flatnonzero(arr), start=1):
            total += self.binomial(int(col), rank)
        return total

    def encode_subsequence(self, subseq: BitSequence | np.ndarray) -> BitSequence:
        """Low-order output bits for one block, per the block decomposition."""
        arr = subseq.array if isinstance(subseq, BitSequence) else np.asarray(subseq)
        num = self.number(arr)
        k = int(arr.sum())
        width = self._output_width(k, num)
        if width == 0:
            return BitSequence.empty()
        return BitSequence.from01(format(num & ((1 << width) - 1), f"0{width}b"))

    def _output_width(self, k: int, num: int) -> int:
        j = bisect_right(self._prefix[k], num)
        return self.blocks[k][j]

    def encode_stream(self, seq: BitSequence) -> tuple[BitSequence, ExtractionStats]:
        """Encode every full block of ``seq``; the remainder is discarded."""
        arr = seq.array
        full = arr.size // self.n
        if full == 0:
            return BitSequence.empty(), _stats(arr.size, 0)
        chunks = arr[: full * self.n].reshape(full, self.n)
        if self._fast is not None:
            out = self._fast.encode(chunks)
        else:
            parts = []
            for row in chunks:
                num = self.number(row)
                width = self._output_width(int(row.sum()), num)
                if width:
                    parts.append(format(num & ((1 << width) - 1), f"0{width}b"))
            out = BitSequence.from01("".join(parts))
        return out, _stats(arr.size, len(out))


class _FastTables:
    """int64 vectorized encoder for block lengths up to 64."""

    def __init__(self, codec: BabkinCodec):
        n = codec.n
        table = np.zeros((n + 1, n + 1), dtype=np.int64)
        for r in range(n + 1):
            table[r, : r + 1] = codec.binomials[r]
        self.table = table
        self.prefix = [np.array(p, dtype=np.int64) for p in codec._prefix]
        self.widths = [np.array(b, dtype=np.int64) for b in codec.blocks]

    def encode(self, chunks: np.ndarray) -> BitSequence:
        nblocks, n = chunks.shape
        ranks = np.cumsum(chunks, axis=1, dtype=np.int64)
        cols = np.broadcast_to(np.arange(n, dtype=np.int64), chunks.shape)
        terms = np.where(chunks.astype(bool), self.table[cols, ranks], 0)
        nums = terms.sum(axis=1)
        ks = ranks[:, -1]
        widths = np.empty(nblocks, dtype=np.int64)
        for k in np.unique(ks):
            sel = ks == k
            j = np.searchsorted(self.prefix[k], nums[sel], side="right")
            widths[sel] = self.widths[k][j]
        ends = np.cumsum(widths)
        out = np.zeros(int(ends[-1]), dtype=np.uint8) if nblocks else np.empty(0, np.uint8)
        starts = ends - widths
        for w in np.unique(widths):
            if w == 0:
                continue
            sel = widths == w
            shifts = np.arange(w - 1, -1, -1, dtype=np.int64)
            bits = ((nums[sel, None] >> shifts) & 1).astype(np.uint8)
            pos = starts[sel, None] + np.arange(w)
            out[pos.ravel()] = bits.ravel()
        return BitSequence.from_array(out)


@lru_cache(maxsize=8)
def _codec_for(n: int) -> BabkinCodec:
    return BabkinCodec(n)


def babkin_number(subseq: BitSequence, codec: BabkinCodec | None = None) -> int:
    """Rank of a block among all arrangements of its Hamming weight."""
    codec = codec or _codec_for(len(subseq))
    return codec.number(subseq)


def babkin_encode_subseq(subseq: BitSequence, codec: BabkinCodec) -> BitSequence:
    """Encode one block with a prebuilt codec."""
    return codec.encode_subsequence(subseq)


def babkin_stream(seq: BitSequence, n: int = 300) -> tuple[BitSequence, ExtractionStats]:
    """Chunk into length-n blocks, encode each, and concatenate in order."""
    if n < 2:
        raise DomainError("stream encoding requires a block length of at least 2")
    return _codec_for(n).encode_stream(seq)


# -- digital mixing ---------------------------------------------------------


def digital_mix(base: BitSequence, quantum: BitSequence, period: int) -> BitSequence:
    """Replace every ``period``-th bit of ``base`` with successive quantum bits.

    Positions period, 2*period, ... (1-based) carry the replacement
    bits; everything else is unchanged.  The output always has the
    base stream's length.
    """
    if period < 1:
        raise DomainError("mixing period must be a positive integer")
    positions = np.arange(period - 1, len(base), period)
    if len(quantum) < positions.size:
        raise InsufficientQuantumBits(
            f"need {positions.size} replacement bits, have {len(quantum)}"
        )
    out = base.array.copy()
    if positions.size:
        out[positions] = quantum.array[: positions.size]
    return BitSequence.from_array(out)
