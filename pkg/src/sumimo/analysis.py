"""Closed-form SINR bounds, spectral efficiency, the performance index
``f(n_t) = SINR_UB + eta`` at a fixed antenna budget, and the antenna-split
planner.

Infinite bounds (a single receive antenna with precoding, a single transmit
antenna without) are returned as ``math.inf``, never as a sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import PRECODED, RAW, LinkConfig

__all__ = [
    "LN2",
    "InfeasibleSNR",
    "AnalysisPoint",
    "PlanResult",
    "db",
    "from_db",
    "sinr_ub_precoded",
    "sinr_ub_raw",
    "sinr_ub",
    "spectral_efficiency",
    "sinr_av_b",
    "sinr_combined",
    "sigma_w2_for_sinr",
    "f_index",
    "f_domain",
    "f_minimizer",
    "analysis_point",
    "plan_antenna_range",
    "expected_moments",
]

LN2 = math.log(2.0)


class InfeasibleSNR(ValueError):
    """Requested SINR per bit is not below the interference-limited bound."""


def db(linear: float) -> float:
    if linear == math.inf:
        return math.inf
    if not linear > 0:
        raise ValueError(f"dB conversion needs a positive ratio, got {linear}")
    return 10.0 * math.log10(linear)


def from_db(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def _check_mode(mode: str):
    if mode not in (PRECODED, RAW):
        raise ValueError(f"unknown mode {mode!r}")


def sinr_ub_precoded(n_t: int, n_r: int, n_rt: int) -> float:
    if n_r < 1:
        raise ValueError("n_r must be >= 1")
    if n_r == 1:
        return math.inf
    return 2.0 * n_rt * (n_t + 1) / (n_r - 1)


def sinr_ub_raw(n_t: int, n_r: int, n_rt: int) -> float:
    if n_t < 1:
        raise ValueError("n_t must be >= 1")
    if n_t == 1:
        return math.inf
    return 2.0 * n_rt * (n_r + 1) / (n_t - 1)


def sinr_ub(n_t: int, n_r: int, n_rt: int, mode: str) -> float:
    _check_mode(mode)
    return sinr_ub_precoded(n_t, n_r, n_rt) if mode == PRECODED else sinr_ub_raw(n_t, n_r, n_rt)


def spectral_efficiency(n_t: int, n_r: int, n_rt: int, mode: str) -> float:
    """Information bits per vector transmission."""
    _check_mode(mode)
    if min(n_t, n_r, n_rt) < 1:
        raise ValueError("counts must be >= 1")
    return (n_r if mode == PRECODED else n_t) / (2.0 * n_rt)


def _interference_and_noise(cfg: LinkConfig) -> tuple[float, float]:
    """Per-use interference and noise powers at the decision point."""
    s2 = cfg.sigma_h**2
    if cfg.mode == PRECODED:
        return 8.0 * s2 * s2 * cfg.n_t * (cfg.n_r - 1), cfg.sigma_w2
    return 8.0 * s2 * s2 * cfg.n_r * (cfg.n_t - 1), 2.0 * cfg.sigma_w2 * s2 * cfg.n_r


def _diag_gain_moments(cfg: LinkConfig) -> tuple[float, float]:
    """E[F_ii] and E[F_ii^2] for one use; n sums |H|^2 over n coefficients."""
    s2 = cfg.sigma_h**2
    n = cfg.n_t if cfg.mode == PRECODED else cfg.n_r
    return 2.0 * s2 * n, 4.0 * s2 * s2 * n * (n + 1)


def sinr_av_b(cfg: LinkConfig) -> float:
    """Average SINR per bit of one re-transmission (before combining)."""
    _, f2 = _diag_gain_moments(cfg)
    interference, noise = _interference_and_noise(cfg)
    signal = 2.0 * f2 * 2.0 * cfg.n_rt
    if interference + noise == 0:
        return math.inf
    return signal / (interference + noise)


def sinr_combined(cfg: LinkConfig) -> float:
    """Average SINR per bit of the combined statistic (half a bit per symbol)."""
    s2 = cfg.sigma_h**2
    n = cfg.n_t if cfg.mode == PRECODED else cfg.n_r
    f2 = 4.0 * s2 * s2 * n * (n * cfg.n_rt + 1) / cfg.n_rt
    interference, noise = _interference_and_noise(cfg)
    if interference + noise == 0:
        return math.inf
    return 2.0 * f2 * 2.0 / ((interference + noise) / cfg.n_rt)


def sigma_w2_for_sinr(target: float, cfg: LinkConfig) -> float:
    """Total noise variance ``E|W|^2`` that puts ``sinr_av_b`` at ``target`` (linear).

    Raises InfeasibleSNR when the target is not strictly below the bound.
    """
    if not target > 0:
        raise ValueError("target SINR must be positive")
    bound = sinr_ub(cfg.n_t, cfg.n_r, cfg.n_rt, cfg.mode)
    if target >= bound:
        raise InfeasibleSNR(
            f"{db(target):.2f} dB is not below the {cfg.mode} bound {db(bound):.2f} dB "
            f"for n_t={cfg.n_t}, n_r={cfg.n_r}, n_rt={cfg.n_rt}"
        )
    _, f2 = _diag_gain_moments(cfg)
    interference, _ = _interference_and_noise(cfg)
    noise_power = 2.0 * f2 * 2.0 * cfg.n_rt / target - interference
    if cfg.mode == PRECODED:
        return noise_power
    return noise_power / (2.0 * cfg.sigma_h**2 * cfg.n_r)


def f_domain(n_tot: int, mode: str) -> tuple[int, int]:
    """Inclusive range of n_t on which f is finite."""
    _check_mode(mode)
    return (1, n_tot - 2) if mode == PRECODED else (2, n_tot - 1)


def f_index(n_t: int, n_tot: int, n_rt: int, mode: str) -> float:
    lo, hi = f_domain(n_tot, mode)
    if not lo <= n_t <= hi:
        raise ValueError(f"n_t={n_t} outside the {mode} domain [{lo}, {hi}] for n_tot={n_tot}")
    if mode == PRECODED:
        return 2.0 * n_rt * (n_t + 1) / (n_tot - n_t - 1) + (n_tot - n_t) / (2.0 * n_rt)
    return 2.0 * n_rt * (n_tot - n_t + 1) / (n_t - 1) + n_t / (2.0 * n_rt)


def f_minimizer(n_tot: int, n_rt: int, mode: str) -> float:
    """Stationary point of f over real n_t (may fall outside the antenna domain)."""
    _check_mode(mode)
    if n_tot < 4:
        raise ValueError("n_tot must be >= 4")
    root = 2.0 * n_rt * math.sqrt(n_tot)
    return n_tot - root - 1.0 if mode == PRECODED else root + 1.0


@dataclass(frozen=True)
class AnalysisPoint:
    n_t: int
    n_r: int
    n_rt: int
    sinr_av_b_ub: float
    eta: float
    f_value: float


def analysis_point(n_t: int, n_r: int, n_rt: int, mode: str) -> AnalysisPoint:
    ub = sinr_ub(n_t, n_r, n_rt, mode)
    eta = spectral_efficiency(n_t, n_r, n_rt, mode)
    return AnalysisPoint(n_t, n_r, n_rt, ub, eta, ub + eta)


@dataclass(frozen=True)
class PlanResult:
    n_t_min: int | None
    n_t_max: int | None
    minimizer_location: float
    excluded: bool

    def __contains__(self, n_t: int) -> bool:
        return not self.excluded and self.n_t_min <= n_t <= self.n_t_max


def plan_antenna_range(n_tot: int, n_rt: int, eta_min: float, mode: str, margin: int = 0) -> PlanResult:
    """Longest run of n_t with SINR_UB > ln 2, eta >= eta_min, away from the f minimum.

    The integers bracketing the minimizer (widened by ``margin`` on each side)
    are removed. Ties between equally long runs go to the higher spectral
    efficiency.
    """
    if not eta_min > 0:
        raise ValueError("eta_min must be positive")
    x_star = f_minimizer(n_tot, n_rt, mode)
    banned = set(range(math.floor(x_star) - margin, math.ceil(x_star) + margin + 1))

    def ok(n_t: int) -> bool:
        n_r = n_tot - n_t
        return (
            n_t not in banned
            and sinr_ub(n_t, n_r, n_rt, mode) > LN2
            and spectral_efficiency(n_t, n_r, n_rt, mode) >= eta_min
        )

    runs: list[tuple[int, int]] = []
    start = None
    for n_t in range(1, n_tot):
        if ok(n_t):
            if start is None:
                start = n_t
        elif start is not None:
            runs.append((start, n_t - 1))
            start = None
    if start is not None:
        runs.append((start, n_tot - 1))
    if not runs:
        return PlanResult(None, None, x_star, True)

    def rank(run):
        lo, hi = run
        best_eta = max(spectral_efficiency(n, n_tot - n, n_rt, mode) for n in (lo, hi))
        return (hi - lo, best_eta)

    lo, hi = max(runs, key=rank)
    return PlanResult(lo, hi, x_star, False)


def expected_moments(cfg: LinkConfig) -> dict[str, float]:
    """Closed-form moments of the per-use decomposition and of the combined statistic."""
    s2 = cfg.sigma_h**2
    s4 = s2 * s2
    f1, f2 = _diag_gain_moments(cfg)
    interference, noise = _interference_and_noise(cfg)
    n = cfg.n_t if cfg.mode == PRECODED else cfg.n_r
    n_other = cfg.n_r if cfg.mode == PRECODED else cfg.n_t
    out = {
        "E[X^4] channel dim": 3.0 * s4,
        "E[F_ii]": f1,
        "E[F_ii^2]": f2,
        "E|I|^2": interference,
        "E|noise|^2": noise,
        "E|I+noise|^2": interference + noise,
        "E[F_i^2] combined": 4.0 * s4 * n * (n * cfg.n_rt + 1) / cfg.n_rt,
        "E|U_i|^2 combined": (interference + noise) / cfg.n_rt,
        "SINR_av,b": sinr_av_b(cfg),
    }
    if n_other >= 2:
        out["E|F_ij|^2"] = 4.0 * s4 * n
    return out
