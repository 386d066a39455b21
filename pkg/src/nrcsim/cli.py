"""Command-line entry point for running scenarios and figure sweeps."""

import argparse
import json
import sys

import numpy as np

from .harness import (PRESETS, SWEEPABLE, ConfigError, ScenarioConfig,
                      records_to_csv, records_to_json, run_scenario, run_sweep)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a JSON object")
    return ScenarioConfig.from_dict(data)


def _emit(records, out: str | None, fmt: str):
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records)
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _parse_values(raw: str):
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrcsim",
        description="TDD massive-MIMO channel non-reciprocity simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON scenario config file")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1)

    sim = sub.add_parser("simulate", help="run one scenario")
    common(sim)

    sweep = sub.add_parser("sweep", help="run a parameter sweep or preset")
    common(sweep)
    group = sweep.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(PRESETS))
    group.add_argument("--param", choices=SWEEPABLE)
    sweep.add_argument("--values", help="comma-separated sweep values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.command == "simulate":
            records = [run_scenario(config, workers=args.workers)]
        else:
            if args.preset:
                records = PRESETS[args.preset](config, workers=args.workers)
            else:
                if not args.values:
                    raise ConfigError("--param requires --values")
                records = run_sweep(config, args.param,
                                    _parse_values(args.values),
                                    workers=args.workers)
        _emit(records, args.out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
