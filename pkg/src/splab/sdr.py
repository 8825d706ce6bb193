"""Sparse distributed representations backed by packed 64-bit words.

An ``Sdr`` is an immutable binary vector of length ``n``.  Bits are packed
little-endian into ``uint64`` words so that popcount, overlap and Hamming
distance cost O(n/64) word operations.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .errors import DimensionError

_WORD = 64


def _pack(bits: np.ndarray) -> np.ndarray:
    n = bits.shape[0]
    n_words = max(1, -(-n // _WORD))
    padded = np.zeros(n_words * _WORD, dtype=np.uint8)
    padded[:n] = bits
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


class Sdr:
    """Fixed-length binary vector with an intended on-bit count.

    ``w_target`` is metadata only: equality and hashing look at the bits.
    """

    __slots__ = ("n", "w_target", "_words")

    def __init__(self, bits: Iterable[int] | np.ndarray, w_target: int | None = None):
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise DimensionError(f"Sdr bits must be 1-D, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("Sdr bits must be 0 or 1")
        n = int(arr.shape[0])
        if n <= 0:
            raise ValueError("Sdr length n must be positive")
        arr = arr.astype(np.uint8)
        words = _pack(arr)
        words.setflags(write=False)
        self.n = n
        self._words = words
        if w_target is None:
            w_target = int(np.bitwise_count(words).sum())
        if not 0 <= w_target <= n:
            raise ValueError(f"w_target={w_target} must lie in [0, n={n}]")
        self.w_target = int(w_target)

    # construction helpers -------------------------------------------------

    @classmethod
    def from_indices(cls, n: int, on: Iterable[int], w_target: int | None = None) -> "Sdr":
        bits = np.zeros(n, dtype=np.uint8)
        idx = np.fromiter(on, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise DimensionError(f"on-bit index out of [0, {n})")
        bits[idx] = 1
        return cls(bits, w_target)

    @classmethod
    def zeros(cls, n: int, w_target: int = 0) -> "Sdr":
        return cls(np.zeros(n, dtype=np.uint8), w_target)

    @classmethod
    def from_string(cls, text: str, w_target: int | None = None) -> "Sdr":
        """Parse a '0'/'1' string; index 0 is the first character."""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a binary string: {text!r}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"), w_target)

    def to_string(self) -> str:
        return (self.bits + ord("0")).tobytes().decode("ascii")

    # accessors ------------------------------------------------------------

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def bits(self) -> np.ndarray:
        out = np.unpackbits(self._words.view(np.uint8), bitorder="little")[: self.n]
        return out

    @property
    def weight(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sdr):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self.n, self._words.tobytes()))

    def __repr__(self) -> str:
        if self.n <= 64:
            return f"Sdr('{self.to_string()}')"
        return f"Sdr(n={self.n}, weight={self.weight})"


def _check_same_length(a: Sdr, b: Sdr) -> None:
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")


def hamming_distance(a: Sdr, b: Sdr) -> int:
    _check_same_length(a, b)
    return int(np.bitwise_count(a.words ^ b.words).sum())


def overlap_score(x: Sdr, y: Sdr) -> int:
    """Number of shared on-bits (the dot product of the two vectors)."""
    _check_same_length(x, y)
    return int(np.bitwise_count(x.words & y.words).sum())


def density(s: Sdr) -> float:
    return s.weight / s.n
