"""Min-weight codeword analysis: coset weights, case classification, enumeration, union bound."""

from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .codec import ListDecoder
from .construction import CodeSpec
from .gf2 import BitBlock, kron_matrix, kron_row, pack_words, polar_transform_array, popcount_words
from .precoder import Precoder, as_precoder, precode_array

BRUTEFORCE_MAX_K = 24


@dataclass(frozen=True)
class CosetQuery:
    """Row ``i`` of ``P_n`` combined with higher frozen rows ``J`` and higher information rows ``extra``."""

    i: int
    J: frozenset[int] = frozenset()
    extra: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "J", frozenset(self.J))
        object.__setattr__(self, "extra", frozenset(self.extra))
        if any(j <= self.i for j in self.J | self.extra):
            raise ValueError(f"all included rows must have index > {self.i}")
        if self.J & self.extra:
            raise ValueError("J and extra overlap")

    def rows(self) -> list[int]:
        return [self.i, *sorted(self.J), *sorted(self.extra)]


def coset_vector(n: int, q: CosetQuery, code: CodeSpec | None = None) -> BitBlock:
    if code is not None:
        frozen = set(code.frozen)
        if not q.J <= frozen:
            raise ValueError(f"J must be frozen indices, got {sorted(q.J - frozen)} in A")
    N = 1 << n
    if q.i < 0 or max(q.rows()) >= N:
        raise ValueError(f"row index out of range for n={n}")
    x = BitBlock.zeros(N)
    for r in q.rows():
        x = x ^ kron_row(n, r)
    return x


def coset_weight(n: int, q: CosetQuery, code: CodeSpec | None = None) -> int:
    """Weight of ``g_i xor (rows in J) xor (rows in extra)``."""
    return coset_vector(n, q, code).weight()


class Case(str, enum.Enum):
    UNCHANGED = "Unchanged"
    REPLACED_SAME_WEIGHT = "ReplacedSameWeight"
    WEIGHT_INCREASED = "WeightIncreased"


def classify_case(n: int, i: int, J: Iterable[int]) -> Case:
    """What happens to the min-weight row ``g_i`` once frozen rows ``J`` are forced in."""
    J = frozenset(J)
    base = kron_row(n, i)
    extra = coset_vector(n, CosetQuery(i, J)) ^ base
    if extra.weight() == 0:
        return Case.UNCHANGED
    x = base ^ extra
    if x.weight() == base.weight():
        return Case.REPLACED_SAME_WEIGHT
    if x.weight() < base.weight():
        raise AssertionError(f"coset weight below w(g_{i}): lower bound violated")
    return Case.WEIGHT_INCREASED


def _rows_float(n: int) -> np.ndarray:
    return kron_matrix(n).astype(np.float32)


def _coset_weights(rows: np.ndarray, i: int, masks: np.ndarray) -> np.ndarray:
    """Weights of ``row_i xor masks @ rows[i+1:]`` for a batch of 0/1 masks."""
    comb = masks.astype(np.float32) @ rows[i + 1:]
    x = (comb.astype(np.int64) & 1) ^ rows[i].astype(np.int64)
    return x.sum(axis=1)


def lemma1_check(n: int, i: int | None = None, trials: int = 10_000,
                 rng: np.random.Generator | int | None = None, chunk: int = 8192) -> bool:
    """No coset ``g_i xor (rows above i)`` weighs less than ``g_i``.

    For ``n <= 4`` every subset of higher rows is checked for every ``i``.
    Otherwise ``trials`` random subsets are drawn (and a random ``i`` per
    chunk when ``i`` is None).
    """
    N = 1 << n
    if i is not None and not 0 <= i < N:
        raise IndexError(f"row {i} out of range for n={n}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = _rows_float(n)
    row_w = rows.sum(axis=1)
    if n <= 4:
        targets = range(N) if i is None else [i]
        for r in targets:
            m = N - 1 - r
            masks = ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1) if m else np.zeros((1, 0))
            if np.any(_coset_weights(rows, r, masks) < row_w[r]):
                return False
        return True
    rng = np.random.default_rng(rng)
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        r = int(rng.integers(0, N)) if i is None else i
        masks = rng.integers(0, 2, size=(t, N - 1 - r))
        if np.any(_coset_weights(rows, r, masks) < row_w[r]):
            return False
        done += t
    return True


def corollary1_check(code: CodeSpec, trials: int = 10_000,
                     rng: np.random.Generator | int | None = None) -> bool:
    """Heavier-than-minimum rows never drop to ``w_min`` when frozen rows are mixed in."""
    rng = np.random.default_rng(rng)
    n, N = code.n, code.N
    rows = _rows_float(n)
    w_min = code.index_sets.d_min
    frozen = np.array(code.frozen)
    heavy = [i for i in code.A if (1 << i.bit_count()) > w_min and np.any(frozen > i)]
    if not heavy:
        return True
    per = max(1, trials // len(heavy))
    for i in heavy:
        above = frozen[frozen > i] - (i + 1)
        masks = rng.integers(0, 2, size=(per, N - 1 - i))
        # force at least one frozen row into every sample
        masks[np.arange(per), rng.choice(above, size=per)] = 1
        if np.any(_coset_weights(rows, i, masks) <= w_min):
            return False
    return True


class Method(str, enum.Enum):
    EXACT = "exact"
    LIST = "list"


@dataclass(frozen=True)
class WeightSpectrumEstimate:
    d_min: int
    A_dmin: int
    method: Method
    L: int | None = None
    converged: bool = True
    histogram: dict[int, int] = field(default_factory=dict, compare=False)


def generator_rows(code: CodeSpec, pre: Precoder) -> np.ndarray:
    """``(K, N)`` rows: the codeword of each unit message."""
    v = np.zeros((code.K, code.N), dtype=np.uint8)
    v[np.arange(code.K), list(code.A)] = 1
    return polar_transform_array(precode_array(as_precoder(pre), v))


def _span(words: np.ndarray) -> np.ndarray:
    table = np.zeros((1, words.shape[1]), dtype=np.uint64)
    for row in words:
        table = np.concatenate([table, table ^ row])
    return table


def _cap(hist: np.ndarray, d_min: int, weight_cap: int | None) -> dict[int, int]:
    # weight_cap is an offset above d_min; None keeps the whole histogram
    top = len(hist) - 1 if weight_cap is None else min(len(hist) - 1, d_min + weight_cap)
    return {w: int(hist[w]) for w in range(d_min, top + 1) if hist[w]}


def enumerate_bruteforce(code: CodeSpec, pre: Precoder, threads: int = 1,
                         weight_cap: int | None = None) -> WeightSpectrumEstimate:
    """Encode all ``2^K - 1`` nonzero messages and histogram the weights.

    The message space is split into a table of low-half spans and a table
    of high-half spans; each shard XORs one slice of the high table against
    the whole low table.
    """
    if code.K > BRUTEFORCE_MAX_K:
        raise ValueError(f"K={code.K} too large for brute force (max {BRUTEFORCE_MAX_K}); "
                         "use list enumeration")
    words = pack_words(generator_rows(code, pre))
    k_lo = min(code.K, 12)
    lo = _span(words[:k_lo])
    hi = _span(words[k_lo:])
    block = max(1, (1 << 20) // len(lo))

    def shard(start: int) -> np.ndarray:
        x = hi[start:start + block, None, :] ^ lo[None, :, :]
        return np.bincount(popcount_words(x).ravel(), minlength=code.N + 1)

    starts = range(0, len(hi), block)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(shard, starts))
    else:
        parts = [shard(s) for s in starts]
    hist = np.sum(parts, axis=0)
    hist[0] -= 1
    if hist[0]:
        raise ArithmeticError("generator rows are linearly dependent")
    d_min = int(np.flatnonzero(hist)[0])
    return WeightSpectrumEstimate(d_min, int(hist[d_min]), Method.EXACT, None, True,
                                  _cap(hist, d_min, weight_cap))


def _list_weights(code: CodeSpec, pre: Precoder, L: int) -> np.ndarray:
    dec = ListDecoder(code, pre, L, dtype=np.float32)
    res = dec.decode(np.ones(code.N, dtype=np.float32))
    words = np.unique(pack_words(res.codewords[0]), axis=0)
    w = popcount_words(words)
    return w[w > 0]


def enumerate_list(code: CodeSpec, pre: Precoder, L: int, probe: bool = True,
                   weight_cap: int | None = 8) -> WeightSpectrumEstimate:
    """List-decoder census of low-weight codewords.

    The decoder is fed the all-zero codeword with unit LLRs and keeps ``L``
    paths; the nonzero codewords left in the final list are counted by
    weight.  Counts are lower bounds unless ``L >= 2^K``.  With ``probe``
    the census is repeated at ``L/2`` and ``converged`` records whether the
    min-weight count was already the same there.  ``weight_cap`` is an
    offset above ``d_min`` for the stored histogram (None keeps everything).
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    w = _list_weights(code, pre, L)
    if w.size == 0:
        raise ArithmeticError("list holds no nonzero codeword")
    d_min = int(w.min())
    hist = np.bincount(w, minlength=code.N + 1)
    count = int(hist[d_min])
    exact = code.K < 63 and L >= (1 << code.K)
    converged = exact
    if not exact and probe:
        w2 = _list_weights(code, pre, L // 2)
        converged = w2.size > 0 and int(w2.min()) == d_min and int((w2 == d_min).sum()) == count
    return WeightSpectrumEstimate(d_min, count, Method.LIST, L, bool(converged), _cap(hist, d_min, weight_cap))


def q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def union_bound_fer(spectrum: WeightSpectrumEstimate | tuple[int, int], rate: float,
                    ebn0_db: float) -> float:
    """Min-distance term of the union bound, ``A_dmin Q(sqrt(2 d_min R Eb/N0))``."""
    if isinstance(spectrum, WeightSpectrumEstimate):
        d_min, a_dmin = spectrum.d_min, spectrum.A_dmin
    else:
        d_min, a_dmin = spectrum
    if not 0 < rate < 1:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    snr = 10.0 ** (ebn0_db / 10.0)
    if not math.isfinite(snr) or snr <= 0:
        raise ValueError(f"invalid Eb/N0 {ebn0_db} dB")
    return a_dmin * q_function(math.sqrt(2.0 * d_min * rate * snr))


SPECTRUM_COLUMNS = ["code", "N", "K", "dmin", "profile", "poly", "method", "L", "A_dmin", "converged"]


def spectrum_row(code: CodeSpec, pre: Precoder, est: WeightSpectrumEstimate) -> dict[str, object]:
    pre = as_precoder(pre)
    return {
        "code": f"({code.N},{code.K},{est.d_min})",
        "N": code.N,
        "K": code.K,
        "dmin": est.d_min,
        "profile": code.method.value,
        "poly": pre.describe(),
        "method": est.method.value,
        "L": "" if est.L is None else est.L,
        "A_dmin": est.A_dmin,
        "converged": str(est.converged).lower(),
    }


def write_spectrum_csv(rows: Sequence[dict[str, object]], out: TextIO, header: str | None = None) -> None:
    if header:
        out.write(f"# {header}\n")
    writer = csv.DictWriter(out, fieldnames=SPECTRUM_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
