"""Convolutional pre-transformation ``v -> u`` and its inverse.

Two variants are supported:

* :class:`SinglePoly` -- ``u_i = sum_j g_j v_{i-j}`` with one shift register.
* :class:`DualRegister` -- the same main register driven by ``g_a`` plus a
  secondary register that only ingests ``v_i`` for ``i`` in a subset ``S``.
  Tap ``g_b[k]`` (``k >= 1``) reads the k-th most recent value ingested
  *before* step ``i``; ``g_b[0]`` must be 0 so the transform stays
  unit upper-triangular.

Register contents are kept as integer bitmasks: bit ``k-1`` of the main state
holds ``v_{i-k}``.  This caps each register memory at 64 bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .construction import CodeSpec, dega_mean_llr
from .gf2 import BitBlock, ToeplitzMatrix, as_bits, parity

MAX_MEMORY = 64


def _taps(g: Sequence[int]) -> tuple[int, ...]:
    g = tuple(int(b) for b in g)
    if not g or any(b not in (0, 1) for b in g):
        raise ValueError(f"polynomial must be a non-empty 0/1 sequence, got {g}")
    # trailing zeros carry no taps
    while len(g) > 1 and g[-1] == 0:
        g = g[:-1]
    if len(g) - 1 > MAX_MEMORY:
        raise ValueError(f"register memory {len(g) - 1} exceeds {MAX_MEMORY}")
    return g


def _tap_mask(g: Sequence[int]) -> int:
    return sum(1 << (k - 1) for k in range(1, len(g)) if g[k])


def parse_poly(text: str) -> tuple[int, ...]:
    """Parse ``"1,0,1,1"`` (or ``"1011"``) into a coefficient tuple."""
    text = text.strip()
    parts = text.split(",") if "," in text else list(text)
    try:
        return tuple(int(p) for p in parts if p.strip() != "")
    except ValueError:
        raise ValueError(f"bad polynomial {text!r}") from None


def format_poly(g: Sequence[int]) -> str:
    return "".join(str(b) for b in g)


@dataclass(frozen=True)
class SinglePoly:
    g: tuple[int, ...]

    def __post_init__(self) -> None:
        g = _taps(self.g)
        if g[0] != 1:
            raise ValueError("g_0 must be 1 for a one-to-one transform")
        object.__setattr__(self, "g", g)

    @property
    def memory(self) -> int:
        return len(self.g) - 1

    def describe(self) -> str:
        return format_poly(self.g)


@dataclass(frozen=True)
class DualRegister:
    g_a: tuple[int, ...]
    g_b: tuple[int, ...]
    S: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        g_a = _taps(self.g_a)
        g_b = _taps(self.g_b)
        if g_a[0] != 1:
            raise ValueError("g_a[0] must be 1")
        if g_b[0] != 0:
            raise ValueError("g_b[0] must be 0")
        object.__setattr__(self, "g_a", g_a)
        object.__setattr__(self, "g_b", g_b)
        object.__setattr__(self, "S", frozenset(int(i) for i in self.S))

    @property
    def memory(self) -> int:
        return len(self.g_a) - 1

    @property
    def memory_b(self) -> int:
        return len(self.g_b) - 1

    def describe(self) -> str:
        return f"{format_poly(self.g_a)}+{format_poly(self.g_b)}/{len(self.S)}"


Precoder = Union[SinglePoly, DualRegister]


class RegisterBank:
    """Tap masks and update rules shared by the bit-level and vectorized paths."""

    def __init__(self, pre: Precoder, N: int):
        if isinstance(pre, SinglePoly):
            g_a, g_b, S = pre.g, (0,), frozenset()
        else:
            g_a, g_b, S = pre.g_a, pre.g_b, pre.S
        if any(not 0 <= s < N for s in S):
            raise ValueError("subset S has indices outside [0, N)")
        self.N = N
        self.mask_a = _tap_mask(g_a)
        self.mem_a = len(g_a) - 1
        self.keep_a = (1 << self.mem_a) - 1
        self.mask_b = _tap_mask(g_b)
        self.mem_b = len(g_b) - 1
        self.keep_b = (1 << self.mem_b) - 1
        self.in_S = np.zeros(N, dtype=bool)
        self.in_S[list(S)] = True
        self.dual = bool(self.mask_b) and bool(S)

    def feedback(self, a: int, b: int) -> int:
        return ((a & self.mask_a).bit_count() ^ (b & self.mask_b).bit_count()) & 1

    def advance(self, i: int, a: int, b: int, v: int) -> tuple[int, int]:
        a = ((a << 1) | v) & self.keep_a
        if self.dual and self.in_S[i]:
            b = ((b << 1) | v) & self.keep_b
        return a, b

    # vectorized over any shape of uint64 state arrays
    def feedback_array(self, a: np.ndarray, b: np.ndarray | None) -> np.ndarray:
        out = parity(a & np.uint64(self.mask_a))
        if self.dual and b is not None:
            out ^= parity(b & np.uint64(self.mask_b))
        return out

    def advance_array(self, i: int, a: np.ndarray, b: np.ndarray | None, v: np.ndarray):
        v = v.astype(np.uint64)
        a = ((a << np.uint64(1)) | v) & np.uint64(self.keep_a)
        if self.dual and self.in_S[i]:
            b = ((b << np.uint64(1)) | v) & np.uint64(self.keep_b)
        return a, b


def precode(pre: Precoder, v: BitBlock) -> BitBlock:
    """Shift-register evaluation of ``u`` from ``v``."""
    bank = RegisterBank(pre, v.length)
    a = b = 0
    u = 0
    for i, vi in enumerate(v):
        u |= (vi ^ bank.feedback(a, b)) << i
        a, b = bank.advance(i, a, b, vi)
    return BitBlock(u, v.length)


def precode_matrix(pre: SinglePoly, v: BitBlock) -> BitBlock:
    """``v G`` with ``G`` the Toeplitz matrix of ``pre.g``."""
    return ToeplitzMatrix(BitBlock.from_bits(pre.g), v.length).multiply(v)


def precode_inverse(pre: Precoder, u: BitBlock) -> BitBlock:
    """The unique ``v`` with ``precode(pre, v) == u`` (forward substitution)."""
    bank = RegisterBank(pre, u.length)
    a = b = 0
    v = 0
    for i, ui in enumerate(u):
        vi = ui ^ bank.feedback(a, b)
        v |= vi << i
        a, b = bank.advance(i, a, b, vi)
    return BitBlock(v, u.length)


def precode_array(pre: Precoder, v: np.ndarray) -> np.ndarray:
    """Precode along the last axis of a 0/1 array."""
    v = np.asarray(v, dtype=np.uint8)
    N = v.shape[-1]
    bank = RegisterBank(pre, N)
    lead = v.shape[:-1]
    a = np.zeros(lead, dtype=np.uint64)
    b = np.zeros(lead, dtype=np.uint64)
    u = np.empty_like(v)
    for i in range(N):
        u[..., i] = v[..., i] ^ bank.feedback_array(a, b)
        a, b = bank.advance_array(i, a, b, v[..., i])
    return u


def long_memory_poly(g_i: Sequence[int], zero_gap: int, g_ii: Sequence[int]) -> tuple[int, ...]:
    """Concatenate ``g_i``, ``zero_gap`` zeros and ``g_ii`` into one polynomial."""
    g_i = tuple(int(b) for b in g_i)
    if not g_i or g_i[0] != 1:
        raise ValueError("g_i must start with 1")
    if zero_gap < 0:
        raise ValueError("zero_gap must be non-negative")
    return g_i + (0,) * zero_gap + tuple(int(b) for b in g_ii)


def auto_subset(code: CodeSpec, fraction: float = 0.25) -> frozenset[int]:
    """The ``fraction * K`` least reliable information indices (DEGA ranking)."""
    rel = dega_mean_llr(code.n, code.rate, code.design_snr_db)
    count = int(round(code.K * fraction))
    ranked = sorted(code.A, key=lambda i: (rel[i], i))
    return frozenset(ranked[:count])


@dataclass(frozen=True)
class ProtectionProfile:
    taps: dict[int, int]
    unprotected: tuple[int, ...]


def protection_profile(pre: Precoder, code: CodeSpec) -> ProtectionProfile:
    """Count, for each information index, the register taps that see another information bit.

    An index with zero such taps has ``u_i = v_i`` whatever the message.
    """
    N = code.N
    info = code.info_mask
    bank = RegisterBank(pre, N)
    g_a = pre.g if isinstance(pre, SinglePoly) else pre.g_a
    ingested: list[int] = []
    taps: dict[int, int] = {}
    for i in range(N):
        if info[i]:
            count = sum(1 for k in range(1, len(g_a)) if g_a[k] and i - k >= 0 and info[i - k])
            if bank.dual:
                g_b = pre.g_b
                for k in range(1, len(g_b)):
                    if g_b[k] and k <= len(ingested) and info[ingested[-k]]:
                        count += 1
            taps[i] = count
        if bank.dual and bank.in_S[i]:
            ingested.append(i)
    unprotected = tuple(i for i, c in taps.items() if c == 0)
    return ProtectionProfile(taps, unprotected)


def rate_profile_insert(code: CodeSpec, d: BitBlock | Sequence[int] | np.ndarray) -> BitBlock:
    """Scatter the K message bits onto positions A, zeros elsewhere."""
    bits = as_bits(d)
    if bits.shape[0] != code.K:
        raise ValueError(f"message length {bits.shape[0]} != K={code.K}")
    v = 0
    for pos, b in zip(code.A, bits):
        if b:
            v |= 1 << pos
    return BitBlock(v, code.N)


def as_precoder(obj: Precoder | Sequence[int] | Iterable[int]) -> Precoder:
    if isinstance(obj, (SinglePoly, DualRegister)):
        return obj
    return SinglePoly(tuple(obj))
