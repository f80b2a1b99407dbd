"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from ..errors import DomainError, SingularSystemError
from ..spectral import Spectrum, dft, read_sequence, reconstruct, uniform_grid, write_sequence
from .config import ConfigError, build_config, parse_assignments
from .experiments import oracle_compare, run_checkered, run_wavy

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("complextd")


def _config_from_args(args, experiment):
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(parse_assignments(fh, args.config))
    values.update(parse_assignments(args.set or [], "--set"))
    if args.output:
        values["output_dir"] = args.output
    return build_config(values, experiment)


def _run(args, runner, experiment):
    config = _config_from_args(args, experiment)
    art = runner(config, output_dir=config.output_dir, plot=args.plot)
    for name, path in sorted(art.files.items()):
        print(f"{name}: {path}")


def cmd_run_checkered(args):
    _run(args, run_checkered, "checkered")


def cmd_run_wavy(args):
    _run(args, run_wavy, "wavy")


def cmd_oracle_compare(args):
    _run(args, oracle_compare, args.experiment)


def cmd_reconstruct(args):
    spectrum = Spectrum.from_csv(args.input, args.sampling_frequency)
    write_sequence(args.output, reconstruct(spectrum, args.length))
    print(f"reconstruction: {args.output}")


def cmd_dft(args):
    x = read_sequence(args.input)
    omegas = uniform_grid(args.frequencies or len(x))
    dft(x, omegas).to_csv(args.output)
    print(f"spectrum: {args.output}")


def build_parser():
    p = argparse.ArgumentParser(prog="complextd", description="TD learning with complex discounts")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def experiment_args(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
        sp.add_argument("--output", help="output directory (overrides output_dir)")
        sp.add_argument("--plot", action="store_true", help="also write SVG figures")

    sp = sub.add_parser("run-checkered", help="checkered grid world, Expected Sarsa bank")
    experiment_args(sp)
    sp.set_defaults(func=cmd_run_checkered)

    sp = sub.add_parser("run-wavy", help="wavy ring world, linear TD bank over tile codes")
    experiment_args(sp)
    sp.set_defaults(func=cmd_run_wavy)

    sp = sub.add_parser("oracle-compare", help="learned spectrum beside the closed-form one")
    experiment_args(sp)
    sp.add_argument("--experiment", choices=["checkered", "wavy", "custom"], default=None)
    sp.set_defaults(func=cmd_oracle_compare)

    sp = sub.add_parser("reconstruct", help="spectrum CSV -> reconstructed sequence CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--length", type=int, required=True, help="sequence length N")
    sp.add_argument("--sampling-frequency", type=float, default=1.0)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("dft", help="sequence CSV (n,value) -> spectrum CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--frequencies", type=int, default=None, help="grid size (default: sequence length)")
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_dft)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularSystemError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:  # unreadable or malformed input files
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
