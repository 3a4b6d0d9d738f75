"""Command-line entry point: ``sumimo {ber,moments,plan,analyze}``.

Exit codes: 0 success, 1 invalid configuration, 2 infeasible experiment.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, fields

from . import analysis
from .channel import MODES, LinkConfig
from .harness import (
    DESK_FRAMES,
    FULL_SCALE_FRAMES,
    ExperimentConfig,
    ber_csv,
    plan_csv,
    run_ber_sweep,
    run_moment_validation,
    run_plan,
)
from .turbo import TurboConfig

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2


def _snr_list(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _emit(text: str, path: str | None):
    if path and path != "-":
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_antennas(nt, nr, ntot):
    if ntot is not None:
        if nt is None and nr is None:
            raise ValueError("--ntot needs --nt or --nr to fix the split")
        if nt is None:
            nt = ntot - nr
        elif nr is None:
            nr = ntot - nt
        elif nt + nr != ntot:
            raise ValueError(f"--nt {nt} + --nr {nr} != --ntot {ntot}")
    if nt is None or nr is None:
        raise ValueError("antenna counts missing: give --nt and --nr (or --ntot with one of them)")
    return nt, nr


def load_experiment(path: str | None, args: argparse.Namespace) -> ExperimentConfig:
    """Experiment settings from a JSON file, with command-line flags taking precedence."""
    doc = {}
    if path:
        with open(path) as fh:
            doc = json.load(fh)
    link = dict(doc.get("link", {}))
    turbo = dict(doc.get("turbo", {}))

    for key, attr in [("mode", "mode"), ("n_rt", "nrt"), ("sigma_h", "sigma_h"),
                      ("bits_per_symbol", "bits_per_symbol")]:
        if getattr(args, attr, None) is not None:
            link[key] = getattr(args, attr)
    if args.block_fading:
        link["block_fading"] = True
    nt = args.nt if args.nt is not None else link.get("n_t")
    nr = args.nr if args.nr is not None else link.get("n_r")
    ntot = args.ntot if args.ntot is not None else link.pop("n_tot", None)
    link["n_t"], link["n_r"] = _resolve_antennas(nt, nr, ntot)
    link.pop("n_tot", None)

    if args.iterations is not None:
        turbo["iterations"] = args.iterations
    if args.interleaver_seed is not None:
        turbo["interleaver_seed"] = args.interleaver_seed

    unknown = set(link) - {f.name for f in fields(LinkConfig)}
    unknown |= set(turbo) - {f.name for f in fields(TurboConfig)}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    frames = doc.get("frames", DESK_FRAMES)
    if args.full_scale:
        frames = FULL_SCALE_FRAMES
    if args.frames is not None:
        frames = args.frames
    snr = doc.get("snr_points_db", [3.5])
    if args.snr_db is not None:
        snr = args.snr_db
    return ExperimentConfig(
        link=LinkConfig(**link),
        turbo=TurboConfig(**turbo),
        snr_points_db=tuple(float(x) for x in snr),
        frames=int(frames),
        master_seed=int(args.seed if args.seed is not None else doc.get("master_seed", 2024)),
        output_path=args.out if args.out is not None else doc.get("output_path"),
        noiseless=bool(args.noiseless or doc.get("noiseless", False)),
    )


def cmd_ber(args) -> int:
    exp = load_experiment(args.config, args)
    if args.dump_config:
        json.dump(asdict(exp), sys.stderr, indent=2)
        sys.stderr.write("\n")
    records = run_ber_sweep(exp, workers=args.workers)
    _emit(ber_csv(records, exp.link), exp.output_path)
    for r in records:
        if r.status != "ok":
            print(f"rejected {r.snr_db} dB: {r.reason}", file=sys.stderr)
    if all(r.status != "ok" for r in records):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_moments(args) -> int:
    cfg = LinkConfig(args.nt, args.nr, args.nrt, sigma_h=args.sigma_h, sigma_w2=args.sigma_w2, mode=args.mode)
    rows = run_moment_validation(cfg, draws=args.draws, seed=args.seed)
    lines = ["moment,closed_form,monte_carlo,rel_error,tolerance,result"]
    for r in rows:
        lines.append(f"{r.name},{r.expected:.6g},{r.estimate:.6g},{r.rel_error:.3e},{r.tolerance:g},"
                     f"{'pass' if r.passed else 'FAIL'}")
    _emit("\n".join(lines) + "\n", args.out)
    n_fail = sum(not r.passed for r in rows)
    print(f"{len(rows) - n_fail}/{len(rows)} moments within tolerance", file=sys.stderr)
    return EXIT_OK


def cmd_plan(args) -> int:
    rows, plan = run_plan(args.ntot, args.nrt, args.eta_min, args.mode, margin=args.margin)
    _emit(plan_csv(rows, plan), args.out)
    if plan.excluded:
        print(f"no admissible n_t (f minimum at {plan.minimizer_location:.2f} cannot be avoided)", file=sys.stderr)
    else:
        print(f"n_t in [{plan.n_t_min}, {plan.n_t_max}], f minimum at {plan.minimizer_location:.2f}",
              file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    nt, nr = _resolve_antennas(args.nt, args.nr, args.ntot)
    pt = analysis.analysis_point(nt, nr, args.nrt, args.mode)
    print(f"mode               {args.mode}")
    print(f"n_t, n_r, n_rt     {nt}, {nr}, {args.nrt}")
    print(f"SINR_av,b,UB       {pt.sinr_av_b_ub:.6g} ({analysis.db(pt.sinr_av_b_ub):.2f} dB)")
    print(f"spectral eff.      {pt.eta:g} bits/transmission")
    print(f"f = UB + eta       {pt.f_value:.6g}")
    if nt + nr >= 4:
        print(f"f minimizer        {analysis.f_minimizer(nt + nr, args.nrt, args.mode):.4f} (n_tot={nt + nr})")
    if args.sigma_w2 is not None:
        cfg = LinkConfig(nt, nr, args.nrt, sigma_h=args.sigma_h, sigma_w2=args.sigma_w2, mode=args.mode)
        s = analysis.sinr_av_b(cfg)
        print(f"SINR_av,b          {s:.6g} ({analysis.db(s):.2f} dB) at sigma_w2={args.sigma_w2:g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sumimo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("ber", help="BER/FER sweep over average SINR per bit")
    b.add_argument("--config", help="JSON experiment file; flags override its values")
    b.add_argument("--mode", choices=MODES)
    b.add_argument("--ntot", type=int)
    b.add_argument("--nt", type=int)
    b.add_argument("--nr", type=int)
    b.add_argument("--nrt", type=int)
    b.add_argument("--snr-db", type=_snr_list, help="SNR points in dB, e.g. '1,2,3.5'")
    b.add_argument("--frames", type=int)
    b.add_argument("--full-scale", action="store_true", help=f"use {FULL_SCALE_FRAMES} frames")
    b.add_argument("--seed", type=int)
    b.add_argument("--out", help="CSV path (stdout when omitted)")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--sigma-h", type=float, dest="sigma_h")
    b.add_argument("--bits-per-symbol", type=int, choices=(1, 2), dest="bits_per_symbol")
    b.add_argument("--block-fading", action="store_true")
    b.add_argument("--iterations", type=int)
    b.add_argument("--interleaver-seed", type=int, dest="interleaver_seed")
    b.add_argument("--noiseless", action="store_true", help="no noise; SNR list ignored")
    b.add_argument("--dump-config", action="store_true", help="print the resolved config to stderr")
    b.set_defaults(func=cmd_ber)

    m = sub.add_parser("moments", help="closed-form moments vs Monte Carlo")
    m.add_argument("--mode", choices=MODES, default="precoded")
    m.add_argument("--nt", type=int, required=True)
    m.add_argument("--nr", type=int, required=True)
    m.add_argument("--nrt", type=int, default=1)
    m.add_argument("--draws", type=int, default=100_000)
    m.add_argument("--sigma-h", type=float, default=math.sqrt(0.5), dest="sigma_h")
    m.add_argument("--sigma-w2", type=float, default=2.0, dest="sigma_w2")
    m.add_argument("--seed", type=int, default=7)
    m.add_argument("--out")
    m.set_defaults(func=cmd_moments)

    pl = sub.add_parser("plan", help="SINR bound / efficiency / f table and admissible n_t range")
    pl.add_argument("--mode", choices=MODES, default="precoded")
    pl.add_argument("--ntot", type=int, required=True)
    pl.add_argument("--nrt", type=int, default=1)
    pl.add_argument("--eta-min", type=float, required=True, dest="eta_min")
    pl.add_argument("--margin", type=int, default=0, help="extra integers excluded around the f minimum")
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_plan)

    a = sub.add_parser("analyze", help="closed forms at one antenna split")
    a.add_argument("--mode", choices=MODES, default="precoded")
    a.add_argument("--ntot", type=int)
    a.add_argument("--nt", type=int)
    a.add_argument("--nr", type=int)
    a.add_argument("--nrt", type=int, default=1)
    a.add_argument("--sigma-h", type=float, default=math.sqrt(0.5), dest="sigma_h")
    a.add_argument("--sigma-w2", type=float, dest="sigma_w2")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        # argparse exits with 2 on usage errors; keep 2 for infeasible runs
        return EXIT_INVALID if stop.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
