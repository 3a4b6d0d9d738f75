"""Unprecoded chain: ``r = H s + w`` followed by the matched filter ``H^H r``,
one symbol per transmit antenna. Indices are zero based (``0 <= i < n_t``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RAW, ChannelUse, CombinedObservation, LinkConfig, draw_channel, draw_noise
from .numerics import hermitian, mat_vec_mul

__all__ = ["MatchedFilterOutput", "transmit_raw", "matched_filter", "combine_raw", "combined_noise_variance"]


@dataclass
class MatchedFilterOutput:
    y: np.ndarray  # (..., n_t)
    cu: ChannelUse

    @property
    def gain(self) -> np.ndarray:
        """Diagonal gains ``F_ii = sum_l |H_li|^2``."""
        return np.sum(np.abs(self.cu.h) ** 2, axis=-2)

    def components(self, i: int | None = None):
        """(desired, interference, noise) of ``y``; they sum to ``y`` up to rounding."""
        h = self.cu.h
        n_t = h.shape[-1]
        if i is not None and not 0 <= i < n_t:
            raise IndexError(f"symbol index {i} out of range for n_t={n_t}")
        f = hermitian(h) @ h
        diag = np.diagonal(f, axis1=-2, axis2=-1)
        desired = np.real(diag) * self.cu.s
        interference = mat_vec_mul(f, self.cu.s) - diag * self.cu.s
        noise = mat_vec_mul(hermitian(h), self.cu.w)
        if i is None:
            return desired, interference, noise
        return desired[..., i], interference[..., i], noise[..., i]


def transmit_raw(s, cfg: LinkConfig, rng: np.random.Generator, h: np.ndarray | None = None) -> ChannelUse:
    """One re-transmission of ``s`` (shape (..., n_t)): ``received = H s + w``."""
    if cfg.mode != RAW:
        raise ValueError("transmit_raw needs a raw LinkConfig")
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim == 0 or s.shape[-1] != cfg.n_t:
        raise ValueError(f"raw symbol vector must have n_t={cfg.n_t} entries, got shape {s.shape}")
    lead = s.shape[:-1]
    if h is None:
        h = draw_channel(rng, cfg, lead)
    elif h.shape[-2:] != (cfg.n_r, cfg.n_t):
        raise ValueError(f"channel must be {cfg.n_r}x{cfg.n_t}, got {h.shape[-2:]}")
    w = draw_noise(rng, cfg, lead)
    received = mat_vec_mul(h, s) + w
    return ChannelUse(h=h, w=w, received=received, s=s, mode=RAW)


def matched_filter(cu: ChannelUse) -> MatchedFilterOutput:
    if cu.mode != RAW:
        raise ValueError("matched_filter applies to raw-mode channel uses only")
    return MatchedFilterOutput(y=mat_vec_mul(hermitian(cu.h), cu.received), cu=cu)


def combine_raw(outputs, cfg: LinkConfig) -> CombinedObservation:
    outputs = list(outputs)
    if not outputs:
        raise ValueError("nothing to combine")
    if len(outputs) != cfg.n_rt:
        raise ValueError(f"expected {cfg.n_rt} re-transmissions, got {len(outputs)}")
    s0 = outputs[0].cu.s
    for o in outputs[1:]:
        if o.cu.s is not s0 and not np.array_equal(o.cu.s, s0):
            raise ValueError("re-transmissions carry different symbol vectors")
    y = np.mean([o.y for o in outputs], axis=0)
    gain = np.mean([np.broadcast_to(o.gain, y.shape) for o in outputs], axis=0)
    return CombinedObservation(gain=gain, y=y, n_rt_used=len(outputs))


def combined_noise_variance(cfg: LinkConfig) -> float:
    """``E|u_i|^2`` after matched filtering and combining."""
    s2 = cfg.sigma_h**2
    per_use = 8.0 * s2 * s2 * cfg.n_r * (cfg.n_t - 1) + 2.0 * cfg.sigma_w2 * s2 * cfg.n_r
    return per_use / cfg.n_rt
