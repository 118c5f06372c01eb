"""PAC encoder and successive-cancellation list decoder.

The decoder is vectorized over a batch of frames and over the list of paths:
every per-path quantity is an array of shape ``(B, P, ...)``.  Intermediate
LLRs and partial sums are stored once per tree level and shared between
paths through index pointers, so forking a path costs an index gather instead
of a copy of its whole state (copy-on-write).  Decisions are recorded as
``(parent, bit)`` pairs and read back by backtracking at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .construction import CodeSpec
from .gf2 import BitBlock, polar_transform, polar_transform_array
from .precoder import Precoder, RegisterBank, as_precoder, precode, precode_array, rate_profile_insert

Metric = Literal["approx", "exact"]


def encode(code: CodeSpec, pre: Precoder, d: BitBlock | np.ndarray) -> BitBlock:
    """Codeword ``x = P_n(precode(insert(d)))``."""
    v = rate_profile_insert(code, d)
    return polar_transform(precode(as_precoder(pre), v))


def encode_array(code: CodeSpec, pre: Precoder, d: np.ndarray) -> np.ndarray:
    """Batch encoder: ``(..., K)`` messages to ``(..., N)`` codewords."""
    d = np.asarray(d, dtype=np.uint8)
    if d.shape[-1] != code.K:
        raise ValueError(f"message length {d.shape[-1]} != K={code.K}")
    v = np.zeros(d.shape[:-1] + (code.N,), dtype=np.uint8)
    v[..., list(code.A)] = d
    return polar_transform_array(precode_array(as_precoder(pre), v))


def _f_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.copysign(np.minimum(np.abs(a), np.abs(b)), a * b)


def _f_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # box-plus as min-sum plus its correction terms; stable for large |a|, |b|
    return _f_minsum(a, b) + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))


def _g(a: np.ndarray, b: np.ndarray, left: np.ndarray) -> np.ndarray:
    return np.where(left.astype(bool), b - a, b + a)


def _gather(data: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``data[b, idx[b, p], ...]`` for every frame ``b`` via one flat ``take``."""
    B, Q = data.shape[:2]
    flat = idx + (np.arange(B, dtype=idx.dtype) * Q)[:, None]
    out = data.reshape((B * Q,) + data.shape[2:]).take(flat.ravel(), axis=0)
    return out.reshape(idx.shape + data.shape[2:])


def _ctz(i: int) -> int:
    return (i & -i).bit_length() - 1


@dataclass
class DecodeResult:
    """Final list, best path first.  Shapes carry a leading batch axis."""

    messages: np.ndarray   # (B, P, K) uint8
    metrics: np.ndarray    # (B, P) float
    codewords: np.ndarray  # (B, P, N) uint8, re-encoded from the partial sums
    state_a: np.ndarray    # (B, P) uint64 main register after the last bit
    state_b: np.ndarray    # (B, P) uint64 secondary register after the last bit


class _Level:
    """Per-level buffer plus the pointer that maps live paths onto its rows."""

    __slots__ = ("data", "ptr")

    def __init__(self) -> None:
        self.data: np.ndarray | None = None
        self.ptr: np.ndarray | None = None  # None means identity

    def write(self, data: np.ndarray) -> None:
        self.data = data
        self.ptr = None

    def read(self) -> np.ndarray:
        if self.ptr is None:
            return self.data
        return _gather(self.data, self.ptr)

    def reindex(self, parent: np.ndarray) -> None:
        if self.data is None:
            return
        if self.ptr is None:
            if self.data.shape[1] == 1:
                self.ptr = np.zeros_like(parent)
            else:
                self.ptr = parent
        else:
            self.ptr = _gather(self.ptr, parent)


class ListDecoder:
    """SCL decoder for PAC codes (a polar code when the precoder is ``[1]``).

    At a frozen index the path is forced to ``v_i = 0`` while ``u_i`` is
    whatever the registers produce; at an information index both values of
    ``v_i`` are tried.  The metric penalty is ``|llr|`` on a hard-decision
    mismatch (``metric="approx"``, min-sum f) or ``log(1 + exp(-(1-2u) llr))``
    (``metric="exact"``, exact box-plus f).
    """

    def __init__(self, code: CodeSpec, pre: Precoder, list_size: int,
                 metric: Metric = "approx", dtype=np.float64):
        if list_size < 1:
            raise ValueError("list_size must be >= 1")
        if code.n < 1:
            raise ValueError("block length must be at least 2")
        if metric not in ("approx", "exact"):
            raise ValueError(f"unknown metric {metric!r}")
        self.code = code
        self.pre = as_precoder(pre)
        self.L = int(list_size)
        self.metric = metric
        self.dtype = dtype
        self.bank = RegisterBank(self.pre, code.N)
        self._f = _f_minsum if metric == "approx" else _f_exact

    def _penalty(self, llr: np.ndarray, u: np.ndarray) -> np.ndarray:
        if self.metric == "approx":
            return np.where((llr < 0) != u.astype(bool), np.abs(llr), 0.0).astype(self.dtype)
        return np.logaddexp(0.0, -(1.0 - 2.0 * u) * llr).astype(self.dtype)

    def _frozen_step(self, llr0: np.ndarray, fb: np.ndarray):
        """Frozen index: ``v_i`` is pinned to 0 but ``u_i`` equals the register output.

        This is the one place PAC decoding differs from polar SCL, where
        ``u_i`` itself would be 0.
        """
        v = np.zeros_like(fb)
        u = fb
        return v, u, self._penalty(llr0, u)

    def decode(self, llr: np.ndarray) -> DecodeResult:
        llr = np.asarray(llr, dtype=self.dtype)
        if llr.ndim == 1:
            llr = llr[None, :]
        code, bank = self.code, self.bank
        n, N = code.n, code.N
        if llr.shape[-1] != N:
            raise ValueError(f"expected {N} LLRs per frame, got {llr.shape[-1]}")
        if not np.all(np.isfinite(llr)):
            raise ValueError("LLR input contains non-finite values")
        B = llr.shape[0]
        info = code.info_mask

        channel = llr[:, None, :]
        llrs = [_Level() for _ in range(n)]
        left = [_Level() for _ in range(n)]
        P = 1
        metric = np.zeros((B, 1), dtype=self.dtype)
        a = np.zeros((B, 1), dtype=np.uint64)
        b = np.zeros((B, 1), dtype=np.uint64)
        hist_parent: list[np.ndarray] = []
        hist_bit: list[np.ndarray] = []
        codeword = None

        for i in range(N):
            top = n - 1 if i == 0 else _ctz(i)
            for s in range(top, -1, -1):
                node = channel if s == n - 1 else llrs[s + 1].read()
                h = 1 << s
                x, y = node[..., :h], node[..., h:]
                if (i >> s) & 1:
                    out = _g(x, y, left[s].read())
                else:
                    out = self._f(x, y)
                llrs[s].write(out)
            llr0 = llrs[0].data[..., 0]
            if llr0.shape[1] != P:
                llr0 = np.broadcast_to(llr0, (B, P))

            fb = bank.feedback_array(a, b)
            if not info[i]:
                v, u, pen = self._frozen_step(llr0, fb)
                metric = metric + pen
            else:
                # candidate layout (B, 2, P): preferred child of every path, then the other one
                pref_u = (llr0 < 0).astype(np.uint8)
                cand_u = np.stack([pref_u, pref_u ^ 1], axis=1)
                cand_m = metric[:, None, :] + self._penalty(llr0[:, None, :], cand_u)
                cand_u = cand_u.reshape(B, 2 * P)
                cand_m = cand_m.reshape(B, 2 * P)
                if 2 * P <= self.L:
                    keep = np.broadcast_to(np.arange(2 * P), (B, 2 * P))
                else:
                    keep = np.argsort(cand_m, axis=1, kind="stable")[:, : self.L]
                parent = keep % P
                u = _gather(cand_u, keep)
                metric = _gather(cand_m, keep)
                a = _gather(a, parent)
                b = _gather(b, parent)
                fb = _gather(fb, parent)
                v = u ^ fb
                for lev in llrs:
                    lev.reindex(parent)
                for lev in left:
                    lev.reindex(parent)
                hist_parent.append(parent.astype(np.int32))
                hist_bit.append(v.astype(np.uint8))
                P = keep.shape[1]

            a, b = bank.advance_array(i, a, b, v)
            c = u[:, :, None].astype(np.uint8)
            for s in range(n):
                if not (i >> s) & 1:
                    left[s].write(c)
                    break
                prev = left[s].read()
                if prev.shape[1] != P:
                    prev = np.broadcast_to(prev, (B, P, prev.shape[2]))
                c = np.concatenate([prev ^ c, c], axis=2)
            else:
                codeword = c

        order = np.argsort(metric, axis=1, kind="stable")
        K = code.K
        messages = np.zeros((B, P, K), dtype=np.uint8)
        cur = order
        for t in range(K - 1, -1, -1):
            messages[:, :, t] = _gather(hist_bit[t], cur)
            cur = _gather(hist_parent[t], cur)
        return DecodeResult(
            messages=messages,
            metrics=_gather(metric, order),
            codewords=_gather(codeword, order),
            state_a=_gather(a, order),
            state_b=_gather(b, order),
        )


def scl_decode(code: CodeSpec, pre: Precoder, llr: np.ndarray, list_size: int,
               metric: Metric = "approx") -> list[tuple[BitBlock, float]]:
    """Decode one frame; returns ``(message, path metric)`` pairs, best first."""
    llr = np.asarray(llr, dtype=float)
    if llr.ndim != 1:
        raise ValueError("scl_decode takes a single frame; use ListDecoder for batches")
    res = ListDecoder(code, pre, list_size, metric).decode(llr)
    return [
        (BitBlock.from_bits(res.messages[0, p]), float(res.metrics[0, p]))
        for p in range(res.metrics.shape[1])
    ]
