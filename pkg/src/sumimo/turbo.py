"""Rate-1/2 turbo code: two recursive systematic convolutional encoders in
parallel, an odd-even interleaver, alternate parity puncturing, and an
iterative log-MAP (BCJR) decoder.

LLR sign convention used throughout the package: a positive LLR favours
bit 0, i.e. ``llr = log P(b=0) / P(b=1)``.

Coded frame layout for ``L`` data bits (length ``2L``)::

    [u0, p1_0, u1, p2_1, u2, p1_2, u3, p2_3, ...]

Even slots carry the systematic bits; odd slot ``2k+1`` carries the parity of
encoder 1 at step ``k`` for even ``k`` and of encoder 2 (working on the
interleaved sequence) at step ``k`` for odd ``k``. Because the interleaver
keeps even indices even and odd indices odd, every data bit keeps exactly
one parity bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "LLR_CLAMP",
    "TurboConfig",
    "Trellis",
    "make_interleaver",
    "rsc_encode",
    "encode",
    "decode",
    "decode_llrs",
    "log_map",
]

LLR_CLAMP = 50.0
_NEG = -1e30


@dataclass(frozen=True)
class TurboConfig:
    """Constituent code and decoder settings.

    Polynomials are octal with the most significant bit as the ``D^0`` tap,
    so the defaults are feedback ``1 + D + D^2`` (7) and feedforward
    ``1 + D^2`` (5).
    """

    constraint_memory: int = 2
    generator_feedforward: int = 0o5
    generator_feedback: int = 0o7
    iterations: int = 8
    interleaver_seed: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.constraint_memory < 1:
            raise ValueError("constraint_memory must be >= 1")
        if self.generator_feedforward <= 0 or self.generator_feedback <= 0:
            raise ValueError("generator polynomials must be nonzero")
        for g in (self.generator_feedforward, self.generator_feedback):
            if g.bit_length() > self.constraint_memory + 1:
                raise ValueError(f"polynomial {g:o} exceeds memory {self.constraint_memory}")
        if not (self.generator_feedback >> self.constraint_memory) & 1:
            raise ValueError("feedback polynomial must have a D^0 tap")


def _taps(poly: int, memory: int) -> list[int]:
    # taps[i] is the coefficient of D^i
    return [(poly >> (memory - i)) & 1 for i in range(memory + 1)]


@dataclass(frozen=True)
class Trellis:
    """State tables of one RSC constituent encoder.

    The state holds the last ``memory`` feedback-register values, most recent
    in the low bit.
    """

    next_state: np.ndarray  # (S, 2)
    parity: np.ndarray  # (S, 2)
    prev_state: np.ndarray  # (S, 2) predecessors of each state
    prev_input: np.ndarray  # (S, 2) input bit on that branch

    @property
    def n_states(self) -> int:
        return self.next_state.shape[0]


@lru_cache(maxsize=None)
def _build_trellis(memory: int, feedforward: int, feedback: int) -> Trellis:
    fb = _taps(feedback, memory)
    ff = _taps(feedforward, memory)
    n_states = 1 << memory
    next_state = np.zeros((n_states, 2), dtype=np.int64)
    parity = np.zeros((n_states, 2), dtype=np.int64)
    for s in range(n_states):
        reg = [(s >> i) & 1 for i in range(memory)]  # reg[i] = a_{k-1-i}
        for u in (0, 1):
            a = u
            for i in range(1, memory + 1):
                a ^= fb[i] & reg[i - 1]
            p = ff[0] & a
            for i in range(1, memory + 1):
                p ^= ff[i] & reg[i - 1]
            new_reg = [a] + reg[:-1]
            next_state[s, u] = sum(b << i for i, b in enumerate(new_reg))
            parity[s, u] = p
    prev_state = np.zeros((n_states, 2), dtype=np.int64)
    prev_input = np.zeros((n_states, 2), dtype=np.int64)
    fill = np.zeros(n_states, dtype=np.int64)
    for s in range(n_states):
        for u in (0, 1):
            t = next_state[s, u]
            prev_state[t, fill[t]] = s
            prev_input[t, fill[t]] = u
            fill[t] += 1
    if not np.all(fill == 2):
        raise ValueError("trellis is not a two-predecessor shift register")
    return Trellis(next_state, parity, prev_state, prev_input)


def trellis_for(cfg: TurboConfig) -> Trellis:
    return _build_trellis(cfg.constraint_memory, cfg.generator_feedforward, cfg.generator_feedback)


def make_interleaver(length: int, seed: int) -> np.ndarray:
    """Pseudo-random odd-even permutation of ``range(length)``.

    ``perm[m]`` is the source index of the ``m``-th interleaved bit; even
    positions draw from even indices and odd from odd.
    """
    if length < 2:
        raise ValueError(f"interleaver length must be >= 2, got {length}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(length)])))
    perm = np.empty(length, dtype=np.int64)
    evens = np.arange(0, length, 2)
    odds = np.arange(1, length, 2)
    perm[0::2] = rng.permutation(evens)
    perm[1::2] = rng.permutation(odds)
    return perm


def rsc_encode(bits: np.ndarray, trellis: Trellis) -> np.ndarray:
    """Parity stream of one RSC encoder started in the zero state (no tail)."""
    bits = np.asarray(bits, dtype=np.int64)
    state = np.zeros(bits.shape[:-1], dtype=np.int64)
    out = np.empty_like(bits)
    for k in range(bits.shape[-1]):
        u = bits[..., k]
        out[..., k] = trellis.parity[state, u]
        state = trellis.next_state[state, u]
    return out


def encode(data, cfg: TurboConfig = TurboConfig(), perm: np.ndarray | None = None) -> np.ndarray:
    """Encode data bits (last axis) into a rate-1/2 coded frame of twice the length."""
    data = np.asarray(data, dtype=np.int64)
    if data.ndim == 0 or data.shape[-1] == 0:
        raise ValueError("cannot encode an empty frame")
    if np.any((data != 0) & (data != 1)):
        raise ValueError("data must be 0/1")
    length = data.shape[-1]
    if perm is None:
        perm = make_interleaver(length, cfg.interleaver_seed)
    elif len(perm) != length:
        raise ValueError("interleaver length does not match the frame")
    tr = trellis_for(cfg)
    p1 = rsc_encode(data, tr)
    p2 = rsc_encode(data[..., perm], tr)
    coded = np.empty((*data.shape[:-1], 2 * length), dtype=np.uint8)
    coded[..., 0::2] = data
    coded[..., 1::4] = p1[..., 0::2]
    coded[..., 3::4] = p2[..., 1::2]
    return coded


def log_map(sys_llr: np.ndarray, par_llr: np.ndarray, apriori: np.ndarray, trellis: Trellis) -> np.ndarray:
    """A-posteriori LLRs of one constituent code, exact log-MAP.

    Inputs have shape (B, K). The encoder starts in state 0 and the final
    state is left open (uniform backward initialisation).
    """
    B, K = sys_llr.shape
    S = trellis.n_states
    xu = np.array([1.0, -1.0])
    xp = 1.0 - 2.0 * trellis.parity  # (S, 2)
    lu = (sys_llr + apriori).T  # (K, B)
    lp = par_llr.T
    # gamma[k, b, s, u]
    gamma = 0.5 * (lu[:, :, None, None] * xu[None, None, None, :] + lp[:, :, None, None] * xp[None, None, :, :])

    ps, pu = trellis.prev_state, trellis.prev_input
    ns = trellis.next_state
    alpha = np.empty((K + 1, B, S))
    alpha[0] = _NEG
    alpha[0, :, 0] = 0.0
    for k in range(K):
        g = gamma[k]
        a = alpha[k]
        t0 = a[:, ps[:, 0]] + g[:, ps[:, 0], pu[:, 0]]
        t1 = a[:, ps[:, 1]] + g[:, ps[:, 1], pu[:, 1]]
        nxt = np.logaddexp(t0, t1)
        alpha[k + 1] = nxt - nxt.max(axis=1, keepdims=True)

    beta = np.empty((K + 1, B, S))
    beta[K] = 0.0
    for k in range(K - 1, -1, -1):
        g = gamma[k]
        b = beta[k + 1]
        prv = np.logaddexp(b[:, ns[:, 0]] + g[:, :, 0], b[:, ns[:, 1]] + g[:, :, 1])
        beta[k] = prv - prv.max(axis=1, keepdims=True)

    # metric[k, b, s, u] = alpha_k(s) + gamma_k(s, u) + beta_{k+1}(next(s, u))
    metric = alpha[:K, :, :, None] + gamma + beta[1:][:, :, ns]
    l0 = np.logaddexp.reduce(metric[..., 0], axis=2)
    l1 = np.logaddexp.reduce(metric[..., 1], axis=2)
    return (l0 - l1).T


def decode_llrs(llrs, cfg: TurboConfig = TurboConfig(), perm: np.ndarray | None = None) -> np.ndarray:
    """Iterative decoding; returns the final a-posteriori data-bit LLRs, shape (..., L)."""
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim == 0 or llrs.shape[-1] % 2 or llrs.shape[-1] == 0:
        raise ValueError("coded LLR length must be even and nonzero")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite")
    lead = llrs.shape[:-1]
    x = np.clip(llrs.reshape(-1, llrs.shape[-1]), -LLR_CLAMP, LLR_CLAMP)
    length = x.shape[-1] // 2
    if perm is None:
        perm = make_interleaver(length, cfg.interleaver_seed)
    elif len(perm) != length:
        raise ValueError(f"interleaver length {len(perm)} does not match frame of {length} data bits")
    tr = trellis_for(cfg)

    ls = x[:, 0::2]
    par = x[:, 1::2]
    lp1 = np.zeros_like(ls)
    lp1[:, 0::2] = par[:, 0::2]
    lp2 = np.zeros_like(ls)
    lp2[:, 1::2] = par[:, 1::2]
    ls_int = ls[:, perm]

    la = np.zeros_like(ls)
    app = ls
    for _ in range(cfg.iterations):
        l1 = log_map(ls, lp1, la, tr)
        e1 = np.clip(l1 - ls - la, -LLR_CLAMP, LLR_CLAMP)
        la2 = e1[:, perm]
        l2 = log_map(ls_int, lp2, la2, tr)
        e2 = np.clip(l2 - ls_int - la2, -LLR_CLAMP, LLR_CLAMP)
        la = np.empty_like(e2)
        la[:, perm] = e2
        app = np.empty_like(l2)
        app[:, perm] = l2
    return app.reshape(*lead, length)


def decode(llrs, cfg: TurboConfig = TurboConfig(), perm: np.ndarray | None = None) -> np.ndarray:
    """Hard data-bit decisions (uint8) after ``cfg.iterations`` iterations."""
    return (decode_llrs(llrs, cfg, perm) < 0).astype(np.uint8)
