"""Canonical binary-sequence type, balance statistics, and file I/O.

The packed on-disk format is little-endian within bytes (bit 0 of the
stream is the least significant bit of byte 0) with a fixed 16-byte
header: 4-byte magic ``PBS1``, 4-byte little-endian version, and an
8-byte little-endian bit count.  Trailing padding bits are written as
zeros and are never observable after a read.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .errors import ConstantSequence, IoFailure, MalformedFile

MAGIC = b"PBS1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQ")

ASCII01 = "ascii01"
PACKED = "packed"
FORMATS = (ASCII01, PACKED)


class BitSequence:
    """Immutable ordered sequence of bits with packed storage.

    Construct through :meth:`from_array`, :meth:`from01`,
    :meth:`from_bits`, or the low-level ``BitSequence(data, nbits)``
    with pre-packed little-endian bytes.
    """

    def __init__(self, data: bytes, nbits: int):
        if nbits < 0:
            raise ValueError("bit count must be non-negative")
        expected = (nbits + 7) // 8
        if len(data) != expected:
            raise ValueError(
                f"packed payload holds {len(data)} bytes, need {expected} for {nbits} bits"
            )
        # Zero the padding so equality and hashing see only addressable bits.
        pad = 8 * expected - nbits
        if pad and data and data[-1] >> (8 - pad):
            buf = bytearray(data)
            buf[-1] &= (1 << (8 - pad)) - 1
            data = bytes(buf)
        self._data = bytes(data)
        self._nbits = nbits

    # -- constructors ---------------------------------------------------

    @classmethod
    def empty(cls) -> "BitSequence":
        return cls(b"", 0)

    @classmethod
    def from_array(cls, bits: np.ndarray | Iterable[int]) -> "BitSequence":
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("bit array must be one-dimensional")
        if arr.size and arr.max() > 1:
            raise ValueError("bit array may contain only 0 and 1")
        return cls(np.packbits(arr, bitorder="little").tobytes(), arr.size)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitSequence":
        return cls.from_array(np.fromiter(bits, dtype=np.uint8))

    @classmethod
    def from01(cls, text: str) -> "BitSequence":
        compact = "".join(text.split())
        if not set(compact) <= {"0", "1"}:
            bad = sorted(set(compact) - {"0", "1"})
            raise ValueError(f"invalid characters in 0/1 text: {bad}")
        arr = np.frombuffer(compact.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls.from_array(arr)

    # -- views ----------------------------------------------------------

    @property
    def packed(self) -> bytes:
        """Little-endian packed payload, padding bits zeroed."""
        return self._data

    @cached_property
    def array(self) -> np.ndarray:
        """Read-only uint8 array of 0/1 values."""
        raw = np.frombuffer(self._data, dtype=np.uint8)
        arr = np.unpackbits(raw, count=self._nbits, bitorder="little")
        arr.setflags(write=False)
        return arr

    def to01(self) -> str:
        return (self.array + ord("0")).astype(np.uint8).tobytes().decode("ascii")

    def ones(self) -> int:
        return int(self.array.sum()) if self._nbits else 0

    def zeros(self) -> int:
        return self._nbits - self.ones()

    # -- sequence protocol ----------------------------------------------

    def __len__(self) -> int:
        return self._nbits

    def __iter__(self) -> Iterator[int]:
        return iter(self.array.tolist())

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitSequence.from_array(self.array[index])
        return int(self.array[index])

    def __add__(self, other: "BitSequence") -> "BitSequence":
        if not isinstance(other, BitSequence):
            return NotImplemented
        return BitSequence.from_array(np.concatenate([self.array, other.array]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitSequence):
            return NotImplemented
        return self._nbits == other._nbits and self._data == other._data

    def __hash__(self) -> int:
        return hash((self._nbits, self._data))

    def __repr__(self) -> str:
        head = self.to01() if self._nbits <= 64 else self.to01()[:61] + "..."
        return f"BitSequence({self._nbits} bits: {head!r})"


@dataclass(frozen=True)
class BalanceStats:
    """Discrepancy and balance ratio of a sequence."""

    discrepancy: int
    balance: float
    ones: int
    zeros: int


def discrepancy(seq: BitSequence) -> int:
    """Signed ones-minus-zeros count; 0 for the empty sequence."""
    return 2 * seq.ones() - len(seq)


def balance(seq: BitSequence) -> float:
    """Balance ratio (N + |D|) / (N - |D|); 1.0 means perfectly balanced.

    Raises ConstantSequence when the sequence contains a single symbol
    (or is empty), where the denominator vanishes.
    """
    n = len(seq)
    d = abs(discrepancy(seq))
    if n == d:
        raise ConstantSequence(
            "balance is undefined for constant or empty sequences"
        )
    return (n + d) / (n - d)


def balance_stats(seq: BitSequence) -> BalanceStats:
    ones = seq.ones()
    n = len(seq)
    d = 2 * ones - n
    if n == abs(d):
        raise ConstantSequence(
            "balance is undefined for constant or empty sequences"
        )
    return BalanceStats(
        discrepancy=d,
        balance=(n + abs(d)) / (n - abs(d)),
        ones=ones,
        zeros=n - ones,
    )


def chunk(seq: BitSequence, n: int) -> tuple[list[BitSequence], BitSequence]:
    """Split into floor(N/n) full chunks plus the trailing remainder.

    The remainder (length N mod n, possibly empty) is returned
    separately so callers can account for unprocessed bits.
    """
    if n < 1:
        raise ValueError("chunk length must be at least 1")
    arr = seq.array
    full = len(seq) // n
    chunks = [BitSequence.from_array(arr[i * n : (i + 1) * n]) for i in range(full)]
    remainder = BitSequence.from_array(arr[full * n :])
    return chunks, remainder


# -- file I/O -----------------------------------------------------------


def write_bits(seq: BitSequence, path, fmt: str = PACKED) -> None:
    """Write a sequence to disk in ``packed`` or ``ascii01`` format."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    try:
        if fmt == ASCII01:
            with open(path, "w", encoding="ascii") as fh:
                fh.write(seq.to01())
                fh.write("\n")
        else:
            with open(path, "wb") as fh:
                fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(seq)))
                fh.write(seq.packed)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_bits(path, fmt: str | None = None) -> BitSequence:
    """Read a sequence from disk; sniffs the format when not given."""
    if fmt is not None and fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if fmt is None:
        fmt = PACKED if blob[:4] == MAGIC else ASCII01
    if fmt == ASCII01:
        try:
            text = blob.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedFile(f"{path}: not valid 0/1 text") from exc
        try:
            return BitSequence.from01(text)
        except ValueError as exc:
            raise MalformedFile(f"{path}: {exc}") from exc
    return _parse_packed(blob, path)


def _parse_packed(blob: bytes, path) -> BitSequence:
    if len(blob) < _HEADER.size:
        raise MalformedFile(f"{path}: truncated header")
    magic, version, nbits = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise MalformedFile(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise MalformedFile(f"{path}: unsupported version {version}")
    payload = blob[_HEADER.size :]
    if len(payload) != (nbits + 7) // 8:
        raise MalformedFile(
            f"{path}: header declares {nbits} bits but payload holds "
            f"{len(payload)} bytes"
        )
    return BitSequence(payload, nbits)
