"""Monte-Carlo FER/BER estimation over AWGN.

Frames are processed in fixed-size chunks; each frame's message and noise
derive only from (master_seed, frame_index), and the early-stopping rule
is evaluated at chunk boundaries in frame order, so results are bitwise
reproducible for any worker count. SCAN-family decoders report
statistics for every iteration 1..t_max out of a single decoding pass.
"""

from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from statistics import NormalDist

import numpy as np

from .channel import channel_llrs, ebn0_to_sigma, modulate_bpsk
from .construction import CodeSpec, build_code
from .decoders import (
    CsrScanDecoder,
    DampingConfig,
    PcScanDecoder,
    ScanDecoder,
    ScDecoder,
)
from .encoder import encode

DECODER_KINDS = ("sc", "scan", "pc-scan", "csr-scan")


@dataclass(frozen=True)
class DecoderConfig:
    kind: str = "sc"
    t_max: int = 1
    damping: DampingConfig = field(default_factory=DampingConfig)
    schedule: str = "sequential"

    def __post_init__(self):
        if self.kind not in DECODER_KINDS:
            raise ValueError(f"unknown decoder {self.kind!r}, expected one of {DECODER_KINDS}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {self.t_max}")

    @property
    def iterations(self) -> int:
        return 1 if self.kind == "sc" else self.t_max


@dataclass(frozen=True)
class SimConfig:
    spec: CodeSpec
    decoder: DecoderConfig
    snr_points: tuple[float, ...]
    max_frames: int = 100_000
    min_frame_errors: int = 100
    master_seed: int = 1
    workers: int = 1
    noiseless: bool = False
    batch_frames: int = 1000

    def __post_init__(self):
        if not self.snr_points:
            raise ValueError("snr_points must be non-empty")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.batch_frames < 1:
            raise ValueError("batch_frames must be >= 1")


@dataclass
class CellStats:
    """Error counters of one (snr, iteration) cell."""

    snr_db: float
    iteration: int
    frames: int
    frame_errors: int
    bit_errors: int
    info_bits_total: int
    seconds: float

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def ber(self) -> float:
        return self.bit_errors / self.info_bits_total

    @property
    def fer_ci_95(self) -> tuple[float, float]:
        return wilson_interval(self.frame_errors, self.frames)

    def row(self) -> dict:
        lo, hi = self.fer_ci_95
        return {
            "snr_db": self.snr_db,
            "iter": self.iteration,
            "frames": self.frames,
            "frame_errors": self.frame_errors,
            "bit_errors": self.bit_errors,
            "fer": self.fer,
            "ber": self.ber,
            "fer_ci_lo": lo,
            "fer_ci_hi": hi,
            "seconds": self.seconds,
        }


@dataclass
class SimResult:
    config: SimConfig
    cells: list[CellStats]

    def cell(self, snr_db: float, iteration: int) -> CellStats:
        for c in self.cells:
            if c.snr_db == snr_db and c.iteration == iteration:
                return c
        raise KeyError(f"no cell for snr={snr_db}, iteration={iteration}")


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= errors <= trials:
        raise ValueError("need 0 <= errors <= trials and trials >= 1")
    z = NormalDist().inv_cdf((1.0 + confidence) / 2.0)
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * np.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    # the exact interval always contains p; clamp out float rounding dust
    lo = max(0.0, min(float(center - half), p))
    hi = min(1.0, max(float(center + half), p))
    return lo, hi


@lru_cache(maxsize=64)
def _code_and_decoder(spec: CodeSpec, dec: DecoderConfig):
    rolemap, pcs = build_code(spec)
    if dec.kind == "sc":
        decoder = ScDecoder(rolemap, pcs)
    elif dec.kind == "scan":
        decoder = ScanDecoder(rolemap, schedule=dec.schedule)
    elif dec.kind == "pc-scan":
        decoder = PcScanDecoder(rolemap, pcs, damping=dec.damping, schedule=dec.schedule)
    else:
        decoder = CsrScanDecoder(rolemap, pcs, schedule=dec.schedule)
    return rolemap, pcs, decoder


def _frame_batch(config: SimConfig, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Messages and unit noise for frames [lo, hi), keyed per frame index."""
    K, N = config.spec.K, config.spec.N
    msgs = np.empty((hi - lo, K), dtype=np.uint8)
    noise = np.empty((hi - lo, N))
    for i, f in enumerate(range(lo, hi)):
        g = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((config.master_seed, f)))
        )
        msgs[i] = g.integers(0, 2, K, dtype=np.uint8)
        noise[i] = g.standard_normal(N)
    return msgs, noise


def _simulate_chunk(config: SimConfig, snr_db: float, lo: int, hi: int):
    """Counters for frames [lo, hi): (frames, per-iteration (ferr, berr), seconds)."""
    t0 = time.perf_counter()
    spec = config.spec
    rolemap, pcs, decoder = _code_and_decoder(spec, config.decoder)
    msgs, noise = _frame_batch(config, lo, hi)
    x = encode(msgs, spec, rolemap, pcs)
    sym = modulate_bpsk(x)
    if config.noiseless:
        llr = channel_llrs(sym, 0.0, noiseless=True)
    else:
        sigma = ebn0_to_sigma(snr_db, spec.rate)
        llr = channel_llrs(sym + sigma * noise, sigma)
    if config.decoder.kind == "sc":
        res = decoder.decode(llr)
    else:
        res = decoder.decode(llr, config.decoder.t_max)
    per_iter = []
    for bits in res.iteration_info_bits:
        errs = bits != msgs
        per_iter.append((int(errs.any(axis=1).sum()), int(errs.sum())))
    return hi - lo, per_iter, time.perf_counter() - t0


def _chunk_results(config: SimConfig, snr_db: float):
    """Yield chunk counters in frame order, fanned out over the worker pool."""
    edges = list(range(0, config.max_frames, config.batch_frames))
    if config.workers == 1:
        for lo in edges:
            yield _simulate_chunk(config, snr_db, lo, min(lo + config.batch_frames, config.max_frames))
        return
    with ProcessPoolExecutor(max_workers=config.workers) as ex:
        pending: deque = deque()
        it = iter(edges)
        def submit_next():
            lo = next(it, None)
            if lo is not None:
                hi = min(lo + config.batch_frames, config.max_frames)
                pending.append(ex.submit(_simulate_chunk, config, snr_db, lo, hi))
        for _ in range(2 * config.workers):
            submit_next()
        while pending:
            res = pending.popleft().result()
            submit_next()
            yield res


def run_cell(config: SimConfig, snr_db: float) -> list[CellStats]:
    """Simulate one SNR point until max_frames or min_frame_errors.

    The stopping rule looks at the final iteration's cumulative frame
    errors at chunk boundaries in frame order, so the set of counted
    frames is a pure function of the config.
    """
    iters = config.decoder.iterations
    frames = 0
    ferr = np.zeros(iters, dtype=np.int64)
    berr = np.zeros(iters, dtype=np.int64)
    seconds = 0.0
    for chunk_frames, per_iter, secs in _chunk_results(config, snr_db):
        if len(per_iter) != iters:
            raise RuntimeError("decoder reported an unexpected iteration count")
        frames += chunk_frames
        for t, (fe, be) in enumerate(per_iter):
            ferr[t] += fe
            berr[t] += be
        seconds += secs
        if ferr[-1] >= config.min_frame_errors:
            break
    return [
        CellStats(
            snr_db=snr_db,
            iteration=t + 1,
            frames=frames,
            frame_errors=int(ferr[t]),
            bit_errors=int(berr[t]),
            info_bits_total=frames * config.spec.K,
            seconds=seconds,
        )
        for t in range(iters)
    ]


def sweep(config: SimConfig) -> SimResult:
    """Map run_cell over the configured SNR points."""
    cells: list[CellStats] = []
    for snr in config.snr_points:
        cells.extend(run_cell(config, snr))
    return SimResult(config=config, cells=cells)
