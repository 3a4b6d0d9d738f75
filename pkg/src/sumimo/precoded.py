"""Precoded chain: the transmitter sends ``H^H s`` so the receiver sees
``H H^H s + w``, one symbol per receive antenna.

Symbol indices are zero based here (``0 <= i < n_r``).
"""

from __future__ import annotations

import numpy as np

from .channel import PRECODED, ChannelUse, CombinedObservation, LinkConfig, draw_channel, draw_noise
from .numerics import hermitian, mat_vec_mul

__all__ = ["transmit_precoded", "effective_channel", "decompose", "combine", "combined_noise_variance"]


def _check_symbols(s: np.ndarray, cfg: LinkConfig) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim == 0 or s.shape[-1] != cfg.n_r:
        raise ValueError(f"precoded symbol vector must have n_r={cfg.n_r} entries, got shape {s.shape}")
    return s


def transmit_precoded(s, cfg: LinkConfig, rng: np.random.Generator, h: np.ndarray | None = None) -> ChannelUse:
    """One re-transmission of ``s`` (shape (..., n_r)) through fresh fading and noise.

    Pass ``h`` to reuse a channel realization (block fading); it must
    broadcast against ``(..., n_r, n_t)``.
    """
    if cfg.mode != PRECODED:
        raise ValueError("transmit_precoded needs a precoded LinkConfig")
    s = _check_symbols(s, cfg)
    lead = s.shape[:-1]
    if h is None:
        h = draw_channel(rng, cfg, lead)
    elif h.shape[-2:] != (cfg.n_r, cfg.n_t):
        raise ValueError(f"channel must be {cfg.n_r}x{cfg.n_t}, got {h.shape[-2:]}")
    w = draw_noise(rng, cfg, lead)
    precoded = mat_vec_mul(hermitian(h), s)
    received = mat_vec_mul(h, precoded) + w
    return ChannelUse(h=h, w=w, received=received, s=s, mode=PRECODED)


def effective_channel(cu: ChannelUse) -> np.ndarray:
    """``F = H H^H``: diagonal entries are the desired gains, off-diagonal the cross gains."""
    return cu.h @ hermitian(cu.h)


def decompose(cu: ChannelUse, i: int | None = None):
    """Split ``received[i]`` into (desired, interference, noise).

    With ``i=None`` all symbol positions are returned along the last axis.
    """
    n_r = cu.h.shape[-2]
    if i is not None and not 0 <= i < n_r:
        raise IndexError(f"symbol index {i} out of range for n_r={n_r}")
    f = effective_channel(cu)
    diag = np.real(np.diagonal(f, axis1=-2, axis2=-1))
    desired = diag * cu.s
    interference = mat_vec_mul(f, cu.s) - np.diagonal(f, axis1=-2, axis2=-1) * cu.s
    noise = np.broadcast_to(cu.w, desired.shape)
    if i is None:
        return desired, interference, noise
    return desired[..., i], interference[..., i], noise[..., i]


def diagonal_gain(cu: ChannelUse) -> np.ndarray:
    # F_ii = sum_j |H_ij|^2, computed without forming H H^H
    return np.sum(np.abs(cu.h) ** 2, axis=-1)


def combine(uses, cfg: LinkConfig) -> CombinedObservation:
    """Average the received vectors and diagonal gains over the re-transmissions."""
    uses = list(uses)
    if not uses:
        raise ValueError("nothing to combine")
    if len(uses) != cfg.n_rt:
        raise ValueError(f"expected {cfg.n_rt} re-transmissions, got {len(uses)}")
    s0 = uses[0].s
    for cu in uses[1:]:
        if cu.s is not s0 and not np.array_equal(cu.s, s0):
            raise ValueError("re-transmissions carry different symbol vectors")
    y = np.mean([cu.received for cu in uses], axis=0)
    gain = np.mean([np.broadcast_to(diagonal_gain(cu), y.shape) for cu in uses], axis=0)
    return CombinedObservation(gain=gain, y=y, n_rt_used=len(uses))


def combined_noise_variance(cfg: LinkConfig) -> float:
    """``E|u_i|^2`` of the combined interference plus noise."""
    s4 = cfg.sigma_h**4
    return (8.0 * s4 * cfg.n_t * (cfg.n_r - 1) + cfg.sigma_w2) / cfg.n_rt
