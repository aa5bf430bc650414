"""Command-line front end for scenario runs, sweeps, and codebook export.

Exit codes: 0 success, 2 configuration error, 3 numerical-regime error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys

from .codebook import build_dft_codebook, build_polar_codebook, save_codebook
from .errors import ConfigError, NumericalRegimeError
from .geometry import ArrayConfig
from .harness import default_config, load_config, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldma",
        description="Near-field location division multiple access simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario described by a JSON config file")
    run.add_argument("config", help="path to the scenario config (JSON)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default="runs", help="output directory (default: runs)")
    run.add_argument("--trials", type=int, default=None, help="override num_trials")
    run.add_argument("--workers", type=int, default=1, help="worker processes for trials")

    sweep = sub.add_parser("sweep-correlation", help="run the correlation-vs-antennas sweep")
    sweep.add_argument("--carrier-frequency", type=float, default=30e9)
    sweep.add_argument(
        "--antenna-grid",
        default=None,
        help="comma-separated odd antenna counts (default 65..1025)",
    )
    sweep.add_argument("--pair", default=None, help="r_l,r_m,angle (meters, meters, radians)")
    sweep.add_argument("--seed", type=int, default=1)
    sweep.add_argument("--out", default="runs")

    codebook = sub.add_parser("codebook", help="codebook utilities")
    codebook_sub = codebook.add_subparsers(dest="codebook_command", required=True)
    build = codebook_sub.add_parser("build", help="build a codebook and write it as JSON")
    build.add_argument("--kind", choices=("dft", "polar"), required=True)
    build.add_argument("--num-antennas", type=int, required=True)
    build.add_argument("--carrier-frequency", type=float, required=True)
    build.add_argument(
        "--element-spacing", type=float, default=None, help="meters (default: half wavelength)"
    )
    build.add_argument("--r-min", type=float, default=4.0, help="closest distance ring (polar)")
    build.add_argument("--coherence-target", type=float, default=0.5, help="adjacent-ring coherence (polar)")
    build.add_argument("--out", required=True, help="output JSON path")

    validate = sub.add_parser("validate", help="validate a scenario config file")
    validate.add_argument("config")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.trials is not None:
        config["num_trials"] = args.trials
    result = run_scenario(config, workers=max(1, args.workers))
    csv_path, manifest_path = result.write(args.out)
    print(f"wrote {csv_path}")
    print(f"wrote {manifest_path}")
    return 0


def _cmd_sweep(args) -> int:
    config = default_config("correlation_sweep")
    config["carrier_frequency"] = args.carrier_frequency
    config["seed"] = args.seed
    if args.antenna_grid is not None:
        try:
            config["antenna_grid"] = [int(tok) for tok in args.antenna_grid.split(",") if tok]
        except ValueError as exc:
            raise ConfigError(f"bad --antenna-grid: {exc}") from exc
    if args.pair is not None:
        try:
            r_l, r_m, angle = (float(tok) for tok in args.pair.split(","))
        except ValueError as exc:
            raise ConfigError("--pair expects r_l,r_m,angle") from exc
        config["location_pair"] = [[r_l, angle], [r_m, angle]]
    result = run_scenario(config)
    csv_path, manifest_path = result.write(args.out)
    print(f"wrote {csv_path}")
    print(f"wrote {manifest_path}")
    return 0


def _cmd_codebook_build(args) -> int:
    if args.num_antennas < 1 or args.num_antennas % 2 == 0:
        raise ConfigError("--num-antennas must be a positive odd integer")
    if args.carrier_frequency <= 0:
        raise ConfigError("--carrier-frequency must be > 0")
    if args.element_spacing is None:
        array = ArrayConfig.half_wavelength(args.num_antennas, args.carrier_frequency)
    else:
        array = ArrayConfig(args.num_antennas, args.element_spacing, args.carrier_frequency)
    if args.kind == "dft":
        cb = build_dft_codebook(array)
    else:
        if not (0.0 < args.coherence_target < 1.0):
            raise ConfigError("--coherence-target must lie in (0, 1)")
        if not args.r_min > 0 or not math.isfinite(args.r_min):
            raise ConfigError("--r-min must be a positive number")
        cb = build_polar_codebook(array, args.r_min, args.coherence_target)
    save_codebook(cb, args.out)
    print(f"wrote {args.out} ({cb.size} codewords)")
    return 0


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    print(f"ok: {config['scenario_kind']} scenario")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep-correlation":
            return _cmd_sweep(args)
        if args.command == "codebook":
            return _cmd_codebook_build(args)
        if args.command == "validate":
            return _cmd_validate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except NumericalRegimeError as exc:
        print(f"numerical regime error: {exc}", file=_sys.stderr)
        return 3
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
