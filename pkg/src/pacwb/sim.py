"""BPSK/AWGN Monte Carlo frame error rate harness."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence, TextIO

import numpy as np

from .codec import ListDecoder, Metric, encode_array
from .construction import CodeSpec
from .precoder import Precoder, as_precoder


@dataclass(frozen=True)
class SimConfig:
    code: CodeSpec
    pre: Precoder
    list_size: int
    ebn0_grid_db: tuple[float, ...]
    max_trials: int = 100_000
    max_errors: int = 100
    rng_seed: int = 0
    batch_size: int = 1000
    metric: Metric = "approx"
    all_zero: bool = False

    def __post_init__(self) -> None:
        grid = tuple(float(x) for x in self.ebn0_grid_db)
        if not grid:
            raise ValueError("SNR grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("SNR grid must be strictly ascending")
        if self.max_errors < 1 or self.max_trials < 1 or self.batch_size < 1:
            raise ValueError("max_errors, max_trials and batch_size must be positive")
        object.__setattr__(self, "ebn0_grid_db", grid)
        object.__setattr__(self, "pre", as_precoder(self.pre))


@dataclass(frozen=True)
class FerPoint:
    ebn0_db: float
    fer: float
    trials: int
    errors: int
    wilson_ci: tuple[float, float] = field(default=(0.0, 1.0))


def noise_variance(rate: float, ebn0_db: float) -> float:
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))
    if not math.isfinite(sigma2) or sigma2 <= 0:
        raise ValueError(f"invalid noise variance {sigma2} at {ebn0_db} dB")
    return sigma2


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _batch_errors(cfg: SimConfig, point: int, batch: int, size: int) -> np.ndarray:
    """Per-frame error flags for one batch; its RNG stream depends only on (seed, point, batch)."""
    rng = np.random.default_rng([cfg.rng_seed, point, batch])
    code = cfg.code
    sigma2 = noise_variance(code.rate, cfg.ebn0_grid_db[point])
    if cfg.all_zero:
        d = np.zeros((size, code.K), dtype=np.uint8)
    else:
        d = rng.integers(0, 2, size=(size, code.K), dtype=np.uint8)
    x = encode_array(code, cfg.pre, d)
    y = (1.0 - 2.0 * x) + rng.normal(0.0, math.sqrt(sigma2), size=x.shape)
    llr = 2.0 * y / sigma2
    res = ListDecoder(code, cfg.pre, cfg.list_size, cfg.metric).decode(llr)
    return np.any(res.messages[:, 0, :] != d, axis=1)


def run_point(cfg: SimConfig, point: int, workers: int = 1,
              progress: Callable[[str], None] | None = None) -> FerPoint:
    trials = errors = 0
    batch = 0
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while trials < cfg.max_trials and errors < cfg.max_errors:
            wave = []
            planned = trials
            for _ in range(max(1, workers)):
                size = min(cfg.batch_size, cfg.max_trials - planned)
                if size <= 0:
                    break
                wave.append((batch, size))
                batch += 1
                planned += size
            if pool is None:
                flags = [_batch_errors(cfg, point, b, s) for b, s in wave]
            else:
                futs = [pool.submit(_batch_errors, cfg, point, b, s) for b, s in wave]
                flags = [f.result() for f in futs]
            for f in flags:
                hits = np.flatnonzero(f)
                need = cfg.max_errors - errors
                if hits.size >= need:
                    # stop exactly at the max_errors-th error
                    trials += int(hits[need - 1]) + 1
                    errors += need
                    break
                trials += f.size
                errors += hits.size
            if progress:
                progress(f"Eb/N0={cfg.ebn0_grid_db[point]:.2f} dB trials={trials} errors={errors}")
    finally:
        if pool is not None:
            pool.shutdown()
    return FerPoint(cfg.ebn0_grid_db[point], errors / trials, trials, errors,
                    wilson_interval(errors, trials))


def run_fer(cfg: SimConfig, workers: int = 1,
            progress: Callable[[str], None] | None = None) -> list[FerPoint]:
    """Simulate every grid point; each point stops at ``max_errors`` or ``max_trials``."""
    return [run_point(cfg, k, workers, progress) for k in range(len(cfg.ebn0_grid_db))]


FER_COLUMNS = ["ebn0_db", "fer", "trials", "errors", "ci_low", "ci_high"]


def manifest_line(cfg: SimConfig) -> str:
    return (f"code=({cfg.code.N},{cfg.code.K}) profile={cfg.code.method.value} "
            f"design_snr_db={cfg.code.design_snr_db} poly={cfg.pre.describe()} L={cfg.list_size} "
            f"metric={cfg.metric} seed={cfg.rng_seed} batch={cfg.batch_size} "
            f"max_errors={cfg.max_errors} max_trials={cfg.max_trials}")


def write_fer_csv(points: Sequence[FerPoint], out: TextIO, header: str | None = None) -> None:
    if header:
        out.write(f"# {header}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(FER_COLUMNS)
    for p in points:
        w.writerow([f"{p.ebn0_db:g}", f"{p.fer:.6e}", p.trials, p.errors,
                    f"{p.wilson_ci[0]:.6e}", f"{p.wilson_ci[1]:.6e}"])
