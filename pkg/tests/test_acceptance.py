"""Acceptance suite: seven end-to-end criteria at their stated tolerances.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line and records it for
the terminal summary. Criteria that the model cannot meet are left failing;
they are not tuned to pass.
"""

import math
import time

import numpy as np
import pytest

from sumimo import analysis
from sumimo.channel import PRECODED, RAW, LinkConfig
from sumimo.harness import ExperimentConfig, ber_csv, run_ber_sweep, run_moment_validation
from sumimo.numerics import make_rng
from sumimo.turbo import decode, encode

from conftest import ACCEPTANCE_LINES

DESK_FRAMES = 2000
SNR_DB = 3.5


def report(number, title, passed, detail):
    line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def sweep(mode, n_t, n_r, n_rt, workers=1, frames=DESK_FRAMES):
    exp = ExperimentConfig(link=LinkConfig(n_t, n_r, n_rt, mode=mode), snr_points_db=(SNR_DB,),
                           frames=frames, master_seed=2024)
    return exp, run_ber_sweep(exp, workers=workers)


@pytest.fixture(scope="module")
def siso_runs():
    """Criterion 4's experiment, once per worker count, shared with criterion 7."""
    return {w: sweep(PRECODED, 1, 1, 4, workers=w) for w in (1, 2)}


def test_criterion_1_closed_form_operating_points():
    t0 = time.perf_counter()
    cases = [
        (PRECODED, 25, 7, 2, "12.39", 1.75), (PRECODED, 12, 20, 1, "1.36", 10.0),
        (PRECODED, 400, 624, 1, "1.09", 312.0), (PRECODED, 1023, 1, 2, "inf", 0.25),
        (RAW, 7, 25, 2, "12.39", 1.75), (RAW, 512, 512, 1, "3.03", 256.0),
        (RAW, 1, 1023, 2, "inf", 0.25), (RAW, 16, 16, 1, "3.55", 8.0),
    ]
    bad = []
    for mode, n_t, n_r, n_rt, want_db, want_eta in cases:
        pt = analysis.analysis_point(n_t, n_r, n_rt, mode)
        got = analysis.db(pt.sinr_av_b_ub)
        if math.isinf(got):
            forms = {"inf"}
        else:
            # reported figures are two-decimal renderings, some rounded, some truncated
            forms = {f"{got:.2f}", f"{math.floor(got * 100) / 100:.2f}"}
        if want_db not in forms or pt.eta != want_eta:
            bad.append((mode, n_t, n_r, n_rt, got, pt.eta))
    elapsed = time.perf_counter() - t0
    ok = report(1, "closed-form operating points", not bad and elapsed < 1.0,
                f"{len(cases) - len(bad)}/{len(cases)} match, {elapsed * 1e3:.1f} ms")
    assert ok, bad


def test_criterion_2_moment_oracle_suite():
    t0 = time.perf_counter()
    worst = (0.0, "")
    failures = []
    for mode in (PRECODED, RAW):
        for n_t, n_r, n_rt in [(4, 4, 1), (8, 2, 2), (2, 8, 2), (4, 4, 2)]:
            rows = run_moment_validation(LinkConfig(n_t, n_r, n_rt, sigma_w2=2.0, mode=mode), draws=100_000)
            for r in rows:
                tol = 0.05 if r.name.startswith("E[X^4]") else 0.02
                tag = f"{mode} {(n_t, n_r, n_rt)} {r.name}"
                worst = max(worst, (r.rel_error, tag))
                if not r.rel_error <= tol:
                    failures.append((tag, r.rel_error))
    elapsed = time.perf_counter() - t0
    ok = report(2, "moment oracle suite", not failures and elapsed < 60,
                f"worst rel. error {worst[0]:.4f} at {worst[1]}, {elapsed:.1f} s")
    assert ok, failures


def grid_argmin(n_tot, n_rt, mode):
    lo, hi = analysis.f_domain(n_tot, mode)
    return min(range(lo, hi + 1), key=lambda n: analysis.f_index(n, n_tot, n_rt, mode))


def test_criterion_3_minimizer_agreement():
    t0 = time.perf_counter()
    off = []
    projected = 0
    for mode in (PRECODED, RAW):
        for n_tot in (16, 32, 64, 1024):
            for n_rt in (1, 2, 4):
                lo, hi = analysis.f_domain(n_tot, mode)
                x = analysis.f_minimizer(n_tot, n_rt, mode)
                # a stationary point outside the antenna domain is compared at
                # the nearest admissible n_t, where the grid minimum then sits
                clamped = min(max(x, lo), hi)
                projected += clamped != x
                if abs(grid_argmin(n_tot, n_rt, mode) - clamped) > 1:
                    off.append((mode, n_tot, n_rt, x, grid_argmin(n_tot, n_rt, mode)))
    elapsed = time.perf_counter() - t0
    ok = report(3, "minimizer agreement", not off,
                f"24 cases, {projected} projected onto the domain edge, {elapsed:.2f} s")
    assert ok, off


def test_criterion_4_siso_precoded_ber(siso_runs):
    _, (rec,) = siso_runs[1]
    ok = report(4, "SISO precoded n_rt=4 at 3.5 dB", rec.status == "ok" and 1e-2 <= rec.ber <= 4e-2,
                f"BER {rec.ber:.4e} over {rec.frames} frames, window [1e-2, 4e-2]")
    assert ok


def test_criterion_5_ber_insensitivity():
    results = {}
    for mode, n_t, n_r, n_rt in [(PRECODED, 12, 20, 1), (PRECODED, 25, 7, 2), (RAW, 16, 16, 1), (RAW, 7, 25, 2)]:
        _, (rec,) = sweep(mode, n_t, n_r, n_rt)
        results[(mode, n_t, n_r, n_rt)] = rec
    problems = []
    for key, rec in results.items():
        if rec.status != "ok":
            problems.append(f"{key} {rec.status}: {rec.reason}")
        elif rec.ber > 1e-4:
            problems.append(f"{key} BER {rec.ber:.2e} > 1e-4")
    for mode in (PRECODED, RAW):
        pair = [r for k, r in results.items() if k[0] == mode and r.status == "ok"]
        if len(pair) == 2:
            # one error per run is the resolution floor for comparing rates
            lo, hi = sorted(max(r.ber, 1.0 / r.bits) for r in pair)
            if hi / lo > 10:
                problems.append(f"{mode} pair differs by {hi / lo:.1f}x")
        else:
            problems.append(f"{mode} pair not comparable")
    detail = "; ".join(
        f"{k[0]} {k[1:]}: " + (f"{r.ber:.2e}" if r.status == "ok" else "rejected") for k, r in results.items()
    )
    ok = report(5, "BER insensitivity at n_tot=32", not problems, detail)
    assert ok, problems


def awgn_llrs(coded, ebn0_db, unit_noise):
    sigma2 = 1.0 / (2 * 0.5 * 10 ** (ebn0_db / 10))
    return 2.0 * ((1.0 - 2.0 * coded) + unit_noise * math.sqrt(sigma2)) / sigma2


def test_criterion_6_codec_properties():
    rng = make_rng(606)
    length = 1000
    data = rng.integers(0, 2, (100, length))
    coded = encode(data)
    roundtrip_ok = np.array_equal(decode(50.0 * (1.0 - 2.0 * coded)), data)

    a = rng.integers(0, 2, (100, length))
    b = rng.integers(0, 2, (100, length))
    linear_ok = np.array_equal(encode(a ^ b), encode(a) ^ encode(b))

    noise = rng.standard_normal(coded.shape)
    bers = [float((decode(awgn_llrs(coded, snr, noise)) != data).mean()) for snr in (1.0, 2.0, 3.0)]
    monotone_ok = all(x >= y for x, y in zip(bers, bers[1:]))
    ok = report(6, "codec properties", roundtrip_ok and linear_ok and monotone_ok,
                f"roundtrip {'ok' if roundtrip_ok else 'broken'}, linearity {'ok' if linear_ok else 'broken'}, "
                f"AWGN BER at 1/2/3 dB = {bers[0]:.2e}/{bers[1]:.2e}/{bers[2]:.2e}")
    assert ok


def test_criterion_7_determinism_across_workers(siso_runs):
    exp1, rec1 = siso_runs[1]
    exp2, rec2 = siso_runs[2]
    csv1, csv2 = ber_csv(rec1, exp1.link).encode(), ber_csv(rec2, exp2.link).encode()
    ok = report(7, "determinism across worker counts", csv1 == csv2,
                f"{len(csv1)} bytes, workers 1 vs 2, {'identical' if csv1 == csv2 else 'different'}")
    assert ok
