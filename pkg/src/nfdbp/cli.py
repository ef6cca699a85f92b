"""Command line entry point: run sweeps, benchmarks, and self tests."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiment
from .errors import InvalidConfigError


def _cmd_run(args) -> int:
    if args.config:
        cfg = experiment.config_from_file(args.config)
    elif args.desk_scale:
        cfg = experiment.desk_preset(args.dispersion)
    else:
        print("run needs a config file or --desk-scale", file=sys.stderr)
        return 2
    if args.desk_scale and args.config:
        cfg = experiment.desk_preset(args.dispersion)
    if args.seed is not None:
        cfg = experiment.config_from_dict({**experiment.config_to_dict(cfg), "seed": args.seed})
    report = experiment.run_experiment(cfg, workers=args.workers)
    out = args.out or f"results.{args.format}"
    experiment.emit_results(report, out, args.format)
    print(f"{len(report.rows)} rows -> {out}")
    if report.errors:
        print(f"{len(report.errors)} cell errors recorded", file=sys.stderr)
        for err in report.errors[:5]:
            print(f"  {err}", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(","))
    table = experiment.bench_scaling(sizes=sizes, repeats=args.repeats)
    text = json.dumps(table, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"bench table -> {args.out}")
    else:
        print(text)
    return 0


def _cmd_selftest(_args) -> int:
    """Quick pipeline sanity: round trip, backrotation group law, metric spots."""
    from .nfddbp import DbpNfdConfig, backrotate, dbp_nfd
    from .normcoord import NormalizedSignal
    from .txrx import q_factor
    from .zscatter import scatter_signal

    rng = np.random.default_rng(99)
    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"  [{'ok' if ok else 'FAIL'}] {name}")
        failures += 0 if ok else 1

    for kappa in (+1, -1):
        d = 512
        env = 0.05 * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
        sig = NormalizedSignal(env, kappa)
        out = dbp_nfd(sig, DbpNfdConfig(x1=0.0))
        err = np.linalg.norm(out.samples - sig.samples) / np.linalg.norm(sig.samples)
        check(f"scatter/inverse round trip kappa={kappa:+d} (err {err:.1e})", err < 1e-9)

        pair = scatter_signal(sig)
        double = backrotate(backrotate(pair, 2e-4), 3e-4)
        joint = backrotate(pair, 5e-4)
        err = np.max(np.abs(double.b_coeffs - joint.b_coeffs))
        check(f"rotation composes kappa={kappa:+d} (err {err:.1e})", err < 1e-10)

    check("q_factor(0.0228) near 6.02 dB", abs(q_factor(0.0228) - 6.02) < 0.05)
    check("q_factor(1e-3) near 9.80 dB", abs(q_factor(1e-3) - 9.80) < 0.05)

    print("selftest:", "PASS" if failures == 0 else f"{failures} FAILURES")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfdbp",
        description="Nonlinear-Fourier-domain digital backpropagation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a launch-power sweep experiment")
    run.add_argument("config", nargs="?", help="JSON experiment config")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--out", default=None, help="output path")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--desk-scale", action="store_true",
                     help="use the reduced desk-scale preset")
    run.add_argument("--dispersion", choices=("normal", "anomalous"), default="normal",
                     help="dispersion sign for the desk preset")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    run.set_defaults(func=_cmd_run)

    bench = sub.add_parser("bench", help="measure transform scaling")
    bench.add_argument("--sizes", default="4096,8192,16384,32768,65536",
                       help="comma separated powers of two")
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--out", default=None)
    bench.set_defaults(func=_cmd_bench)

    selftest = sub.add_parser("selftest", help="quick numerical sanity checks")
    selftest.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
