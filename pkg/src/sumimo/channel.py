"""Link configuration, Rayleigh draws, QPSK mapping and soft demapping shared
by the precoded and the unprecoded chains.

Noise convention: ``LinkConfig.sigma_w2`` is the total complex noise variance
``E|W|^2``, i.e. twice the per-dimension variance. ``sigma_h`` is the
per-dimension standard deviation of a channel coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import sample_complex_gaussian

__all__ = [
    "PRECODED",
    "RAW",
    "LinkConfig",
    "ChannelUse",
    "CombinedObservation",
    "draw_channel",
    "draw_noise",
    "map_qpsk",
    "llrs_from_combined",
    "coded_llrs",
]

PRECODED = "precoded"
RAW = "raw"
MODES = (PRECODED, RAW)


@dataclass(frozen=True)
class LinkConfig:
    n_t: int
    n_r: int
    n_rt: int = 1
    sigma_h: float = math.sqrt(0.5)
    sigma_w2: float = 0.0
    mode: str = PRECODED
    # one channel draw per frame and re-transmission instead of per vector use
    block_fading: bool = False
    # coded bits carried by one QPSK symbol: 1 uses the diagonal pair +-(1+j)
    bits_per_symbol: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_t < 1 or self.n_r < 1 or self.n_rt < 1:
            raise ValueError("antenna and re-transmission counts must be >= 1")
        if not (self.sigma_h > 0 and math.isfinite(self.sigma_h)):
            raise ValueError("sigma_h must be positive")
        if not (self.sigma_w2 >= 0 and math.isfinite(self.sigma_w2)):
            raise ValueError("sigma_w2 must be >= 0")
        if self.bits_per_symbol not in (1, 2):
            raise ValueError("bits_per_symbol must be 1 or 2")

    @property
    def n_tot(self) -> int:
        return self.n_t + self.n_r

    @property
    def streams(self) -> int:
        """Symbols carried by one vector channel use."""
        return self.n_r if self.mode == PRECODED else self.n_t


@dataclass
class ChannelUse:
    """One re-transmission of a symbol vector (or a stack of them)."""

    h: np.ndarray  # (..., n_r, n_t)
    w: np.ndarray  # (..., n_r)
    received: np.ndarray  # (..., n_r)
    s: np.ndarray
    mode: str


@dataclass
class CombinedObservation:
    """Per-symbol decision statistic ``y = gain * s + u`` after combining."""

    gain: np.ndarray
    y: np.ndarray
    n_rt_used: int


def draw_channel(rng: np.random.Generator, cfg: LinkConfig, lead: tuple = ()) -> np.ndarray:
    return sample_complex_gaussian(rng, cfg.sigma_h, (*lead, cfg.n_r, cfg.n_t))


def draw_noise(rng: np.random.Generator, cfg: LinkConfig, lead: tuple = ()) -> np.ndarray:
    # always consume the stream, so noise draws are common across SNR points
    unit = sample_complex_gaussian(rng, 1.0, (*lead, cfg.n_r))
    return unit * math.sqrt(cfg.sigma_w2 / 2.0)


def map_qpsk(coded: np.ndarray, bits_per_symbol: int = 1) -> np.ndarray:
    """Map coded bits (last axis) to symbols with coordinates +-1 +-j.

    Two bits per symbol: first bit sets the I sign, second the Q sign, 0 maps
    to +1. One bit per symbol: bit ``b`` maps to ``(1 - 2b)(1 + j)``.
    """
    c = 1.0 - 2.0 * np.asarray(coded, dtype=np.float64)
    if bits_per_symbol == 1:
        return c * (1.0 + 1.0j)
    if bits_per_symbol == 2:
        if c.shape[-1] % 2:
            raise ValueError("odd number of coded bits for 2 bits per symbol")
        return c[..., 0::2] + 1j * c[..., 1::2]
    raise ValueError("bits_per_symbol must be 1 or 2")


def llrs_from_combined(obs: CombinedObservation, noise_var_est: float) -> np.ndarray:
    """In-phase and quadrature LLRs per symbol, stacked on a trailing axis of 2.

    ``noise_var_est`` is the total complex variance ``E|u|^2`` of the combined
    disturbance, treated as circular Gaussian.
    """
    if not noise_var_est > 0:
        raise ValueError(f"noise variance estimate must be positive, got {noise_var_est}")
    scale = 4.0 * np.asarray(obs.gain) / noise_var_est
    y = np.asarray(obs.y)
    return np.stack([scale * y.real, scale * y.imag], axis=-1)


def coded_llrs(obs: CombinedObservation, noise_var_est: float, bits_per_symbol: int = 1) -> np.ndarray:
    """Flatten per-symbol LLRs into the coded-bit order used by ``map_qpsk``."""
    pair = llrs_from_combined(obs, noise_var_est)
    if bits_per_symbol == 1:
        return pair.sum(axis=-1)
    return pair.reshape(*pair.shape[:-2], -1)
