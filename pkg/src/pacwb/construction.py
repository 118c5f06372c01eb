"""Rate profiles (the information set A) and the index sets derived from them."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np


class ProfileMethod(str, enum.Enum):
    RM = "rm"
    RM_POLAR = "rm-polar"
    RELIABILITY = "reliability"
    EXPLICIT = "explicit"


DEFAULT_DESIGN_SNR_DB = 4.0


def popcount(i: int) -> int:
    return int(i).bit_count()


def _check_node_mean(m: np.ndarray) -> np.ndarray:
    # piecewise fit of phi^-1(1 - (1 - phi(m))^2)
    return np.where(
        m > 12, 0.9861 * m - 2.3152,
        np.where(
            m > 3.5, m * (0.009005 * m + 0.7694) - 0.9507,
            np.where(m > 1, m * (0.062883 * m + 0.3678) - 0.1627, m * (0.2202 * m + 0.06448)),
        ),
    )


def dega_mean_llr(n: int, rate: float, design_snr_db: float) -> np.ndarray:
    """Mean LLR of every synthetic channel by Gaussian-approximation density evolution.

    BPSK over AWGN at Eb/N0 = ``design_snr_db``; larger means more reliable.
    The channel seen by ``u_i`` applies the transform selected by bit ``n-1``
    of ``i`` first and bit 0 last (natural-order polar transform).
    """
    N = 1 << n
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (design_snr_db / 10.0))
    m = np.full(N, 2.0 / sigma2)
    idx = np.arange(N)
    for b in range(n - 1, -1, -1):
        m = np.where((idx >> b) & 1, 2.0 * m, _check_node_mean(m))
    return m


@dataclass(frozen=True)
class IndexSets:
    """Min-weight information rows ``M`` and the frozen rows ``Ncrit`` that follow them."""

    M: tuple[int, ...]
    Ncrit: tuple[int, ...]
    d_min: int


@dataclass(frozen=True)
class CodeSpec:
    n: int
    K: int
    A: tuple[int, ...]
    method: ProfileMethod = ProfileMethod.EXPLICIT
    design_snr_db: float = DEFAULT_DESIGN_SNR_DB

    def __post_init__(self) -> None:
        N = 1 << self.n
        if not 0 < self.K <= N:
            raise ValueError(f"K={self.K} out of range for N={N}")
        A = tuple(sorted(int(i) for i in self.A))
        if len(set(A)) != len(A) or len(A) != self.K:
            raise ValueError(f"A must hold {self.K} distinct indices")
        if A and (A[0] < 0 or A[-1] >= N):
            raise ValueError("A has indices outside [0, N)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "method", ProfileMethod(self.method))

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return self.K / self.N

    @cached_property
    def frozen(self) -> tuple[int, ...]:
        a = set(self.A)
        return tuple(j for j in range(self.N) if j not in a)

    @cached_property
    def info_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        mask[list(self.A)] = True
        mask.flags.writeable = False
        return mask

    @cached_property
    def index_sets(self) -> IndexSets:
        return index_sets(self)

    @property
    def label(self) -> str:
        return f"({self.N},{self.K},{self.index_sets.d_min})"

    def to_config(self) -> str:
        lines = [
            f"n={self.n}",
            f"K={self.K}",
            f"method={self.method.value}",
            f"design_snr_db={self.design_snr_db}",
        ]
        if self.method is ProfileMethod.EXPLICIT:
            lines.append("A=" + ",".join(str(i) for i in self.A))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str) -> "CodeSpec":
        fields: dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"malformed config line: {raw!r}")
            fields[key.strip()] = val.strip()
        try:
            n = int(fields["n"])
            K = int(fields["K"])
        except KeyError as exc:
            raise ValueError(f"config is missing {exc.args[0]}") from None
        method = ProfileMethod(fields.get("method", "rm-polar"))
        snr = float(fields.get("design_snr_db", DEFAULT_DESIGN_SNR_DB))
        if "A" in fields:
            A = [int(t) for t in fields["A"].split(",") if t.strip()]
            spec = cls(n, K, tuple(A), ProfileMethod.EXPLICIT, snr)
            if method is not ProfileMethod.EXPLICIT:
                built = build_profile(n, K, method, snr)
                if built.A != spec.A:
                    raise ValueError(f"A does not match the {method.value} profile")
                return built
            return spec
        if method is ProfileMethod.EXPLICIT:
            raise ValueError("explicit method requires an A= line")
        return build_profile(n, K, method, snr)


def build_profile(
    n: int,
    K: int,
    method: ProfileMethod | str = ProfileMethod.RM_POLAR,
    design_snr_db: float = DEFAULT_DESIGN_SNR_DB,
) -> CodeSpec:
    """Choose the K information indices of a length-2^n code.

    RM and RM-polar rank by row weight first and break ties inside the
    threshold weight class by DEGA reliability, then by ascending index.
    """
    method = ProfileMethod(method)
    N = 1 << n
    if not 0 < K <= N:
        raise ValueError(f"K={K} out of range for N={N}")
    if method is ProfileMethod.EXPLICIT:
        raise ValueError("use CodeSpec(...) directly for an explicit profile")
    rel = dega_mean_llr(n, K / N, design_snr_db)
    if method is ProfileMethod.RELIABILITY:
        order = sorted(range(N), key=lambda i: (-rel[i], i))
    else:
        order = sorted(range(N), key=lambda i: (-popcount(i), -rel[i], i))
    return CodeSpec(n, K, tuple(sorted(order[:K])), method, design_snr_db)


def explicit_profile(n: int, A: Iterable[int], design_snr_db: float = DEFAULT_DESIGN_SNR_DB) -> CodeSpec:
    A = tuple(A)
    return CodeSpec(n, len(A), A, ProfileMethod.EXPLICIT, design_snr_db)


def index_sets(spec: CodeSpec) -> IndexSets:
    d_min = min(1 << popcount(i) for i in spec.A)
    M = tuple(i for i in spec.A if (1 << popcount(i)) == d_min)
    first = M[0]
    Ncrit = tuple(j for j in spec.frozen if j > first)
    return IndexSets(M, Ncrit, d_min)


def corollary2_holds(spec: CodeSpec) -> bool:
    """True when no frozen row follows a min-weight information row.

    In that case precoding cannot change the min-weight multiplicity.
    """
    return not spec.index_sets.Ncrit


def segments(spec: CodeSpec, m: int) -> list[range]:
    """Split ``[0, N)`` into ``N / 2^m`` contiguous segments of width ``2^m``."""
    if not 0 <= m <= spec.n:
        raise ValueError(f"m={m} must lie in [0, n={spec.n}]")
    w = 1 << m
    return [range(s, s + w) for s in range(0, spec.N, w)]
