"""Command-line entry point.

Exactly one of ``--config``, ``--preset`` or ``--list-presets`` is
required. ``--verify`` runs the verification suite on the model of the
selected config or preset instead of simulating it.

Exit codes: 0 success, 1 unexpected error, 2 configuration or usage
error, 3 I/O error, 4 a verification check failed.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import PRESETS, load_config, preset_configs, with_overrides
from .errors import ConfigError
from .harness import run_experiment
from .outputs import _write_all, emit_outputs
from .verification import describe, run_verification

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3, 4


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gevbandit",
                                description="GEV-based online learning and bandit experiments.")
    cmd = p.add_mutually_exclusive_group(required=True)
    cmd.add_argument("--config", metavar="PATH", help="YAML experiment configuration")
    cmd.add_argument("--preset", metavar="NAME", choices=list(PRESETS), help="built-in experiment")
    cmd.add_argument("--list-presets", action="store_true", help="list built-in experiments")
    p.add_argument("--verify", action="store_true", help="verify the model instead of simulating")
    p.add_argument("--seed", type=int, help="overrides GEVBANDIT_SEED and the config")
    p.add_argument("--reps", type=_positive_int, help="number of repetitions")
    p.add_argument("--horizon", type=_positive_int, help="number of rounds")
    p.add_argument("--out", metavar="DIR", help="output directory (default GEVBANDIT_OUT or ./results)")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--plot", action="store_true", help="also write an SVG regret plot")
    return p


def _env_seed():
    raw = os.environ.get("GEVBANDIT_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"GEVBANDIT_SEED must be an integer, got {raw!r}", field="GEVBANDIT_SEED")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.list_presets:
        for name, entries in PRESETS.items():
            print(f"{name}: {', '.join(e['label'] for e in entries)}")
        return EXIT_OK

    out_dir = Path(args.out or os.environ.get("GEVBANDIT_OUT") or "results")
    try:
        seed = args.seed if args.seed is not None else _env_seed()
        configs = load_config(args.config) if args.config else preset_configs(args.preset)
        if not isinstance(configs, list):
            configs = [configs]
        configs = [with_overrides(c, seed=seed, repetitions=args.reps, horizon=args.horizon)
                   for c in configs]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.verify:
            return _verify(configs, out_dir)
        results = [run_experiment(c, threads=args.threads) for c in configs]
        emit_outputs(results, out_dir, plot=args.plot)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ImportError as exc:
        print(f"missing optional dependency: {exc}", file=sys.stderr)
        return EXIT_OTHER
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER

    for res in results:
        c = res.config
        print(f"{c.label:<18} total reward {res.mean_total_reward:10.2f} +- {res.stderr_total_reward:.2f}"
              f"  final avg regret {res.final_average_regret:.5f}")
    print(f"wrote outputs to {out_dir}")
    return EXIT_OK


def _verify(configs, out_dir: Path) -> int:
    ok = True
    files = {}
    seen = set()
    for c in configs:
        key = describe(c.model)
        if key in seen:
            continue
        seen.add(key)
        report = run_verification(c.model, eta=c.eta, seed=c.seed)
        print(f"{c.label}: {key}")
        print(report.summary())
        files[f"{c.label}_verification.csv"] = report.to_csv()
        ok = ok and report.passed
    _write_all(out_dir, files)
    return EXIT_OK if ok else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
