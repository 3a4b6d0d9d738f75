"""Monte Carlo drivers: BER sweeps, moment validation and planner tables.

Every frame draws from its own counter-based stream keyed by
``(master_seed, frame_index)``. Frames are processed in fixed-size chunks
and chunk results are integer error counts, so the output does not depend
on how many worker processes share the chunks.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis, precoded, raw
from .channel import PRECODED, LinkConfig, coded_llrs, draw_channel, map_qpsk
from .numerics import MomentAccumulator, make_rng
from .turbo import TurboConfig, decode, encode, make_interleaver

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "BerRecord",
    "MomentRow",
    "derive_frame_length",
    "simulate_frame",
    "run_ber_sweep",
    "run_moment_validation",
    "run_plan",
    "ber_csv",
    "plan_csv",
    "PLAN_COLUMNS",
    "BER_COLUMNS",
]

DESK_FRAMES = 2000
FULL_SCALE_FRAMES = 10_000
CHUNK_FRAMES = 50


@dataclass(frozen=True)
class ExperimentConfig:
    link: LinkConfig
    turbo: TurboConfig = field(default_factory=TurboConfig)
    snr_points_db: tuple = (3.5,)
    frames: int = DESK_FRAMES
    master_seed: int = 2024
    output_path: str | None = None
    # run without noise; the SNR list is ignored and one record is produced
    noiseless: bool = False

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if not self.noiseless:
            if not self.snr_points_db:
                raise ValueError("at least one SNR point is required")
            if not all(math.isfinite(x) for x in self.snr_points_db):
                raise ValueError("SNR points must be finite")


@dataclass(frozen=True)
class BerRecord:
    snr_db: float
    sinr_ub_db: float
    sigma_w2: float
    bit_errors: int
    bits: int
    frame_errors: int
    frames: int
    status: str = "ok"
    reason: str = ""

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else math.nan

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan


def derive_frame_length(cfg: LinkConfig) -> tuple[int, int]:
    """Data bits per frame: the smallest integer above 1000 divisible by the stream count."""
    n = cfg.streams
    l_d1 = (1000 // n + 1) * n
    return l_d1, 2 * l_d1


def _transmit_all(sym: np.ndarray, cfg: LinkConfig, rng: np.random.Generator):
    """All re-transmissions of a frame's symbol vectors, combined."""
    if cfg.mode == PRECODED:
        uses = []
        for _ in range(cfg.n_rt):
            h = draw_channel(rng, cfg) if cfg.block_fading else None
            uses.append(precoded.transmit_precoded(sym, cfg, rng, h=h))
        return precoded.combine(uses, cfg), precoded.combined_noise_variance(cfg)
    outs = []
    for _ in range(cfg.n_rt):
        h = draw_channel(rng, cfg) if cfg.block_fading else None
        outs.append(raw.matched_filter(raw.transmit_raw(sym, cfg, rng, h=h)))
    return raw.combine_raw(outs, cfg), raw.combined_noise_variance(cfg)


def simulate_frame(coded: np.ndarray, cfg: LinkConfig, rng: np.random.Generator) -> np.ndarray:
    """Coded bits -> QPSK -> channel x n_rt -> combine -> coded-bit LLRs."""
    sym = map_qpsk(coded, cfg.bits_per_symbol).reshape(-1, cfg.streams)
    obs, noise_var = _transmit_all(sym, cfg, rng)
    # interference-free and noiseless: any positive scale saturates the LLRs
    noise_var = noise_var if noise_var > 0 else 1e-9
    return coded_llrs(obs, noise_var, cfg.bits_per_symbol).reshape(-1)


def _frame_data(master_seed: int, start: int, stop: int, l_d1: int) -> tuple[list, np.ndarray]:
    rngs, data = [], []
    for idx in range(start, stop):
        rng = make_rng(master_seed, idx)
        data.append(rng.integers(0, 2, l_d1, dtype=np.uint8))
        rngs.append(rng)
    return rngs, np.array(data)


def _run_chunk(task) -> list[tuple[int, int]]:
    exp, sigmas, start, stop = task
    l_d1, _ = derive_frame_length(exp.link)
    perm = make_interleaver(l_d1, exp.turbo.interleaver_seed)
    out = []
    for sw in sigmas:
        # fresh streams per SNR point: identical data, fading and unit noise
        rngs, data = _frame_data(exp.master_seed, start, stop, l_d1)
        coded = encode(data, exp.turbo, perm)
        cfg = replace(exp.link, sigma_w2=sw)
        llrs = np.array([simulate_frame(c, cfg, rng) for c, rng in zip(coded, rngs)])
        errors = decode(llrs, exp.turbo, perm) != data
        out.append((int(errors.sum()), int(errors.any(axis=1).sum())))
    return out


def run_ber_sweep(exp: ExperimentConfig, workers: int = 1, chunk_frames: int = CHUNK_FRAMES) -> list[BerRecord]:
    """One BerRecord per SNR point; points at or above the bound are rejected, not run."""
    link = exp.link
    l_d1, _ = derive_frame_length(link)
    bound = analysis.sinr_ub(link.n_t, link.n_r, link.n_rt, link.mode)
    bound_db = analysis.db(bound)

    points: list[tuple[float, float | None, str]] = []
    if exp.noiseless:
        points.append((math.inf, 0.0, ""))
    else:
        for snr_db in exp.snr_points_db:
            try:
                sw = analysis.sigma_w2_for_sinr(analysis.from_db(snr_db), link)
            except analysis.InfeasibleSNR as err:
                points.append((snr_db, None, str(err)))
                continue
            points.append((snr_db, sw, ""))

    runnable = [sw for _, sw, _ in points if sw is not None]
    totals = [(0, 0)] * len(runnable)
    if runnable:
        tasks = [(exp, runnable, a, min(a + chunk_frames, exp.frames)) for a in range(0, exp.frames, chunk_frames)]
        log.info("%s n_t=%d n_r=%d n_rt=%d: %d frames x %d points in %d chunks",
                 link.mode, link.n_t, link.n_r, link.n_rt, exp.frames, len(runnable), len(tasks))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_chunk, tasks))
        else:
            results = [_run_chunk(t) for t in tasks]
        for res in results:
            totals = [(b + rb, f + rf) for (b, f), (rb, rf) in zip(totals, res)]

    records = []
    it = iter(totals)
    for snr_db, sw, reason in points:
        if sw is None:
            records.append(BerRecord(snr_db, bound_db, math.nan, 0, 0, 0, 0, "rejected", reason))
            continue
        bit_errors, frame_errors = next(it)
        records.append(BerRecord(snr_db, bound_db, sw, bit_errors, exp.frames * l_d1, frame_errors, exp.frames))
    return records


BER_COLUMNS = [
    "mode", "n_t", "n_r", "n_rt", "snr_db", "sinr_ub_db", "sigma_w2", "frames", "bits",
    "bit_errors", "ber", "frame_errors", "fer", "status", "reason",
]


def _fmt(x: float, spec: str) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if x == math.inf:
        return "inf"
    return format(x, spec)


def ber_csv(records: list[BerRecord], link: LinkConfig) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BER_COLUMNS)
    for r in records:
        w.writerow([
            link.mode, link.n_t, link.n_r, link.n_rt,
            _fmt(r.snr_db, ".4f"), _fmt(r.sinr_ub_db, ".4f"), _fmt(r.sigma_w2, ".6e"),
            r.frames, r.bits, r.bit_errors, _fmt(r.ber, ".4e"),
            r.frame_errors, _fmt(r.fer, ".4e"), r.status, r.reason,
        ])
    return buf.getvalue()


@dataclass(frozen=True)
class MomentRow:
    name: str
    expected: float
    estimate: float
    rel_error: float
    tolerance: float
    passed: bool


def _tolerance(name: str) -> float:
    if name.startswith("E[X^4]"):
        return 0.05
    if name.startswith("SINR"):
        return 0.03
    return 0.02


def run_moment_validation(cfg: LinkConfig, draws: int = 100_000, seed: int = 7, batch: int = 20_000) -> list[MomentRow]:
    """Monte Carlo estimates of every closed-form moment, with pass/fail per row."""
    if draws < 10_000:
        raise ValueError("moment validation needs at least 10^4 draws")
    expected = analysis.expected_moments(cfg)
    acc = {name: MomentAccumulator() for name in expected}
    desired_pow = MomentAccumulator()
    n = cfg.streams
    rng = make_rng(seed, 0)
    done = 0
    while done < draws:
        m = min(batch, draws - done)
        done += m
        bits = rng.integers(0, 2, (m, n * cfg.bits_per_symbol))
        s = map_qpsk(bits, cfg.bits_per_symbol)
        if cfg.mode == PRECODED:
            uses = [precoded.transmit_precoded(s, cfg, rng) for _ in range(cfg.n_rt)]
            parts = [precoded.decompose(cu) for cu in uses]
            cross = [precoded.effective_channel(cu) for cu in uses]
            obs = precoded.combine(uses, cfg)
        else:
            outs = [raw.matched_filter(raw.transmit_raw(s, cfg, rng)) for _ in range(cfg.n_rt)]
            uses = [o.cu for o in outs]
            parts = [o.components() for o in outs]
            cross = [np.conj(np.swapaxes(cu.h, -1, -2)) @ cu.h for cu in uses]
            obs = raw.combine_raw(outs, cfg)
        for cu, (desired, interference, noise), f in zip(uses, parts, cross):
            gain = np.real(np.diagonal(f, axis1=-2, axis2=-1))
            acc["E[X^4] channel dim"].update(cu.h.real**4)
            acc["E[F_ii]"].update(gain)
            acc["E[F_ii^2]"].update(gain**2)
            acc["E|I|^2"].update(np.abs(interference) ** 2)
            acc["E|noise|^2"].update(np.abs(noise) ** 2)
            acc["E|I+noise|^2"].update(np.abs(interference + noise) ** 2)
            desired_pow.update(np.abs(desired) ** 2)
            if "E|F_ij|^2" in acc:
                off = ~np.eye(n, dtype=bool)
                acc["E|F_ij|^2"].update(np.abs(f[..., off]) ** 2)
        acc["E[F_i^2] combined"].update(obs.gain**2)
        acc["E|U_i|^2 combined"].update(np.abs(obs.y - obs.gain * s) ** 2)

    denom = acc["E|I+noise|^2"].mean
    rows = []
    for name, exp_value in expected.items():
        if name == "SINR_av,b":
            est = desired_pow.mean * 2 * cfg.n_rt / denom if denom > 0 else math.inf
        else:
            est = acc[name].mean
        tol = _tolerance(name)
        if exp_value == 0 or math.isinf(exp_value):
            rel = 0.0 if est == exp_value else math.inf
        else:
            rel = abs(est - exp_value) / abs(exp_value)
        rows.append(MomentRow(name, exp_value, est, rel, tol, rel <= tol))
    return rows


PLAN_COLUMNS = [
    "kind", "n_t", "n_r", "sinr_ub_db", "eta", "f_value", "admissible",
    "n_t_min", "n_t_max", "minimizer", "excluded",
]


def run_plan(n_tot: int, n_rt: int, eta_min: float, mode: str, margin: int = 0):
    """Per-n_t table of bound, efficiency and f plus the planner's chosen range."""
    if n_tot < 4:
        raise ValueError("n_tot must be >= 4")
    plan = analysis.plan_antenna_range(n_tot, n_rt, eta_min, mode, margin=margin)
    rows = []
    for n_t in range(1, n_tot):
        n_r = n_tot - n_t
        ub = analysis.sinr_ub(n_t, n_r, n_rt, mode)
        eta = analysis.spectral_efficiency(n_t, n_r, n_rt, mode)
        rows.append({
            "kind": "point", "n_t": n_t, "n_r": n_r,
            "sinr_ub_db": analysis.db(ub), "eta": eta, "f_value": ub + eta,
            "admissible": n_t in plan,
        })
    return rows, plan


def plan_csv(rows: list[dict], plan: analysis.PlanResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLAN_COLUMNS)
    for r in rows:
        w.writerow([
            r["kind"], r["n_t"], r["n_r"], _fmt(r["sinr_ub_db"], ".4f"), _fmt(r["eta"], ".4f"),
            _fmt(r["f_value"], ".6f"), int(r["admissible"]), "", "", "", "",
        ])
    w.writerow([
        "summary", "", "", "", "", "", "",
        "" if plan.excluded else plan.n_t_min, "" if plan.excluded else plan.n_t_max,
        _fmt(plan.minimizer_location, ".4f"), int(plan.excluded),
    ])
    return buf.getvalue()
