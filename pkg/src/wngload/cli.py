"""Command line entry point.

    wngload run [CONFIG] [--trials N] [--seed S] [--out DIR] [--workers K]
    wngload scan [CONFIG] [--seed S] [--out DIR]
    wngload defaults
"""
import argparse
import json
import logging
import os
import sys

from .experiment import (ConfigError, ExperimentConfig, apply_overrides, load_config,
                         run_experiment, scan_spatial_spectrum, validate, write_config_echo)

EXIT_CONFIG = 2
EXIT_IO = 3


def _fail(kind, message, code, field=None):
    err = {"error": kind, "message": message}
    if field is not None:
        err["field"] = field
    print(json.dumps(err), file=sys.stderr)
    return code


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wngload",
        description="WNG-constrained adaptive diagonal loading experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", nargs="?", help="JSON config file (defaults if omitted)")
        p.add_argument("--seed", type=int, help="base RNG seed (trial t uses seed + t)")
        p.add_argument("--out", help="output directory")

    run = sub.add_parser("run", help="run the Monte Carlo ensemble and write CSVs")
    common(run)
    run.add_argument("--trials", type=int, help="number of trials")
    run.add_argument("--workers", type=int, help="worker processes")

    scan = sub.add_parser("scan", help="write the true-ECM Capon spectrum of trial 0")
    common(scan)

    sub.add_parser("defaults", help="print the default config as JSON")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "defaults":
        json.dump(validate(ExperimentConfig()).to_dict(), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return 0

    overrides = dict(seed=args.seed, out=args.out)
    if args.command == "run":
        overrides.update(trials=args.trials, workers=args.workers)
    try:
        if args.config:
            config = load_config(args.config, **overrides)
        else:
            config = apply_overrides(ExperimentConfig(), **overrides)
    except ConfigError as exc:
        return _fail("invalid-config", exc.message, EXIT_CONFIG, exc.field)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)

    try:
        if args.command == "run":
            run_experiment(config)
            print(f"wrote results to {config.output_dir}")
        else:
            path = scan_spatial_spectrum(config)
            write_config_echo(os.path.join(config.output_dir, "config.json"), config)
            print(f"wrote {path}")
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)
    return 0


if __name__ == "__main__":
    sys.exit(main())
