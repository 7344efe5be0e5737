"""BPSK over AWGN and the channel LLRs feeding the decoding tree root.

Noise is generated from a counter-based per-frame seeding scheme so a
simulation result depends only on (master seed, frame index), never on
worker count or trial order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Saturating LLR magnitude used at the channel interface for noiseless
# frames; decoders treat true infinities separately.
LLR_MAX = 1e9


def ebn0_to_sigma(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for unit-energy BPSK at Eb/N0 (dB)."""
    if not 0 < rate <= 1:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return float(np.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))))


def sigma_to_ebn0(sigma: float, rate: float) -> float:
    if sigma <= 0 or not 0 < rate <= 1:
        raise ValueError("sigma must be positive and rate in (0, 1]")
    return float(10.0 * np.log10(1.0 / (2.0 * rate * sigma * sigma)))


@dataclass(frozen=True)
class ChannelParams:
    """SNR point of a simulation: Eb/N0 in dB plus the code rate."""

    ebn0_db: float
    rate: float

    @property
    def sigma(self) -> float:
        return ebn0_to_sigma(self.ebn0_db, self.rate)


def modulate_bpsk(x) -> np.ndarray:
    """Map bit 0 -> +1.0, bit 1 -> -1.0."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def awgn(symbols, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. Gaussian noise of standard deviation sigma."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    s = np.asarray(symbols, dtype=np.float64)
    return s + sigma * rng.standard_normal(s.shape)


def channel_llrs(y, sigma: float, noiseless: bool = False) -> np.ndarray:
    """LLRs of BPSK observations: 2*y/sigma^2, or saturated if noiseless."""
    y = np.asarray(y, dtype=np.float64)
    if noiseless:
        return np.where(y >= 0, LLR_MAX, -LLR_MAX)
    if sigma <= 0:
        raise ValueError("sigma must be positive unless the noiseless flag is set")
    return 2.0 * y / (sigma * sigma)


def frame_rng(master_seed: int, frame_index: int) -> np.random.Generator:
    """Deterministic per-frame generator keyed by (master seed, frame index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, frame_index))))
