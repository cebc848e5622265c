from __future__ import annotations

import sys
from typing import Dict

from django.core.management.base import BaseCommand, CommandError, CommandParser

from ..harness import ExperimentConfig, config_from_mapping, read_config


class GffpercCommand(BaseCommand):
    """BaseCommand without system checks whose flag errors exit 1 with the usage text."""

    requires_system_checks = []

    def create_parser(self, prog_name: str, subcommand: str, **kwargs) -> CommandParser:
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # argparse would exit 2, which is reserved for invariant violations
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv) -> None:
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            # errors raised by handle() are reported inside BaseCommand.run_from_argv
            if "--traceback" in argv:
                raise
            self.stderr.write(self.create_parser(argv[0], argv[1]).format_usage(), ending="")
            self.stderr.write(f"{exc.__class__.__name__}: {exc}")
            sys.exit(exc.returncode)


# ----------------------------
# Shared experiment flags
# ----------------------------


def add_experiment_arguments(parser: CommandParser) -> None:
    parser.add_argument("--config", help="key = value experiment file")
    parser.add_argument("--L", dest="L", help="aspect ratio of the rectangle (0, L) x (0, 1)")
    parser.add_argument("--delta", help="mesh size, or a comma-separated list (fractions allowed)")
    parser.add_argument("--lambda", dest="lam", help="boundary height: a number, LAMBDA0 or a multiple like 2*LAMBDA0")
    parser.add_argument("--bc", choices=["zero", "alternating", "plus_zero"])
    parser.add_argument("--mode", help="event, or a comma-separated list of events")
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out")


def experiment_config(options: Dict[str, object]) -> ExperimentConfig:
    overrides = {
        "L": options.get("L"),
        "lambda": options.get("lam"),
        "bc": options.get("bc"),
        "modes": options.get("mode"),
        "deltas": options.get("delta"),
        "samples": options.get("samples"),
        "seed": options.get("seed"),
        "workers": options.get("workers"),
        "out": options.get("out"),
    }
    try:
        if options.get("config"):
            return read_config(options["config"], overrides)
        return config_from_mapping(overrides)
    except OSError as exc:
        raise CommandError(f"cannot read config: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise CommandError(f"invalid configuration: {exc}") from exc
