"""GF(2) bit vectors, rows of the polar kernel power and Toeplitz convolution matrices.

A :class:`BitBlock` packs its bits into a single Python integer, element ``i``
living at bit ``i`` of the integer.  Index 0 is always the first element
(``u_0`` in ``u_0 ... u_{N-1}``).  The numpy helpers at the bottom work on
unpacked ``uint8`` arrays and on ``uint64`` word-packed arrays, which is what
the decoder and the enumerators use in their inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class BitBlock:
    """Fixed-length immutable GF(2) vector."""

    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise ValueError("value has bits outside the block length")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitBlock":
        value = 0
        length = 0
        for i, b in enumerate(bits):
            if b not in (0, 1, True, False):
                raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
            if b:
                value |= 1 << i
            length = i + 1
        return cls(value, length)

    @classmethod
    def zeros(cls, length: int) -> "BitBlock":
        return cls(0, length)

    @classmethod
    def unit(cls, length: int, i: int) -> "BitBlock":
        if not 0 <= i < length:
            raise IndexError(f"index {i} out of range for length {length}")
        return cls(1 << i, length)

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> "BitBlock":
        value = 0
        for i in support:
            if not 0 <= i < length:
                raise IndexError(f"index {i} out of range for length {length}")
            value ^= 1 << i
        return cls(value, length)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.length
        if not 0 <= i < self.length:
            raise IndexError(f"index {i} out of range for length {self.length}")
        return (self.value >> i) & 1

    def __iter__(self) -> Iterator[int]:
        v = self.value
        for _ in range(self.length):
            yield v & 1
            v >>= 1

    def _check(self, other: "BitBlock") -> None:
        if self.length != other.length:
            raise ValueError(f"length mismatch: {self.length} vs {other.length}")

    def __xor__(self, other: "BitBlock") -> "BitBlock":
        self._check(other)
        return BitBlock(self.value ^ other.value, self.length)

    def __and__(self, other: "BitBlock") -> "BitBlock":
        self._check(other)
        return BitBlock(self.value & other.value, self.length)

    def weight(self) -> int:
        return self.value.bit_count()

    def support(self) -> list[int]:
        return [i for i, b in enumerate(self) if b]

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.uint8, count=self.length)

    def __str__(self) -> str:
        return "".join(str(b) for b in self)

    def __repr__(self) -> str:
        return f"BitBlock('{self}')"


def weight(b: BitBlock) -> int:
    """Hamming weight."""
    return b.weight()


def wedge(a: BitBlock, b: BitBlock) -> BitBlock:
    """Bitwise AND of two equal-length blocks."""
    return a & b


def _log2_exact(length: int) -> int:
    n = length.bit_length() - 1
    if length <= 0 or (1 << n) != length:
        raise ValueError(f"length {length} is not a power of two")
    return n


def kron_row(n: int, i: int) -> BitBlock:
    """Row ``i`` of the n-th Kronecker power of ``[[1, 0], [1, 1]]``.

    Entry ``j`` is 1 exactly when the binary expansion of ``j`` is a subset of
    that of ``i``, so the row weight is ``2 ** popcount(i)``.
    """
    N = 1 << n
    if not 0 <= i < N:
        raise IndexError(f"row {i} out of range for n={n}")
    value = 0
    j = i
    while True:
        value |= 1 << j
        if j == 0:
            break
        j = (j - 1) & i
    return BitBlock(value, N)


def kron_matrix(n: int) -> np.ndarray:
    """Explicit ``P^{(x)n}`` built by repeated Kronecker products."""
    kernel = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    out = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        out = np.kron(out, kernel)
    return out


def _stage_masks(n: int) -> list[int]:
    # mask of positions j with bit b of j clear, one per stage b
    N = 1 << n
    masks = []
    for b in range(n):
        h = 1 << b
        block = (1 << h) - 1
        m = 0
        for start in range(0, N, 2 * h):
            m |= block << start
        masks.append(m)
    return masks


def polar_transform(u: BitBlock) -> BitBlock:
    """``u P_n`` over GF(2) with an in-place butterfly, O(N log N)."""
    n = _log2_exact(u.length)
    x = u.value
    for b, mask in enumerate(_stage_masks(n)):
        x ^= (x >> (1 << b)) & mask
    return BitBlock(x, u.length)


def polar_transform_array(u: np.ndarray) -> np.ndarray:
    """Polar transform along the last axis of a 0/1 array (any leading shape)."""
    u = np.asarray(u, dtype=np.uint8)
    N = u.shape[-1]
    _log2_exact(N)
    x = u.copy()
    lead = x.shape[:-1]
    h = 1
    while h < N:
        v = x.reshape(*lead, N // (2 * h), 2, h)
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


@dataclass(frozen=True)
class ToeplitzMatrix:
    """Upper-triangular Toeplitz matrix whose rows are shifts of ``g``."""

    g: BitBlock
    size: int

    def __post_init__(self) -> None:
        if self.g[0] != 1:
            raise ValueError("g_0 must be 1")
        if self.size <= 0:
            raise ValueError("size must be positive")

    def row(self, r: int) -> BitBlock:
        if not 0 <= r < self.size:
            raise IndexError(r)
        mask = (1 << self.size) - 1
        return BitBlock((self.g.value << r) & mask, self.size)

    def to_array(self) -> np.ndarray:
        return np.array([self.row(r).to_array() for r in range(self.size)], dtype=np.uint8)

    def multiply(self, v: BitBlock) -> BitBlock:
        """Row vector times matrix, ``v G``."""
        if v.length != self.size:
            raise ValueError(f"length mismatch: {v.length} vs {self.size}")
        out = 0
        for r in v.support():
            out ^= self.row(r).value
        return BitBlock(out, self.size)

    def inverse_poly(self) -> BitBlock:
        """Power-series inverse of ``g`` truncated to ``size`` terms.

        The inverse of a unit upper-triangular Toeplitz matrix is again
        Toeplitz, generated by ``1 / g(D) mod D^size``.
        """
        g = list(self.g)
        h = [0] * self.size
        h[0] = 1
        for k in range(1, self.size):
            acc = 0
            for j in range(1, min(k, len(g) - 1) + 1):
                acc ^= g[j] & h[k - j]
            h[k] = acc
        return BitBlock.from_bits(h)

    def inverse(self) -> "ToeplitzMatrix":
        return ToeplitzMatrix(self.inverse_poly(), self.size)


# ---------------------------------------------------------------------------
# word-packed arrays

def pack_words(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(..., N)`` 0/1 array into ``(..., ceil(N/64))`` uint64 words.

    Bit ``j`` of the vector lands at bit ``j % 64`` of word ``j // 64``.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    N = bits.shape[-1]
    W = (N + 63) // 64
    pad = W * 64 - N
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.uint8)], axis=-1)
    b = bits.reshape(*bits.shape[:-1], W, 8, 8)
    bytes_ = np.packbits(b, axis=-1, bitorder="little")[..., 0]
    return np.ascontiguousarray(bytes_).view(np.uint64).reshape(*bits.shape[:-1], W)


def popcount_words(words: np.ndarray) -> np.ndarray:
    """Total popcount over the last axis of a uint64 array."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def parity(x: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(x) & 1).astype(np.uint8)


def as_bits(seq: Sequence[int] | BitBlock | np.ndarray) -> np.ndarray:
    if isinstance(seq, BitBlock):
        return seq.to_array()
    arr = np.asarray(seq, dtype=np.uint8)
    if arr.ndim != 1 or np.any(arr > 1):
        raise ValueError("expected a 1-D 0/1 sequence")
    return arr
