from django.core.management.base import CommandError

from ...harness import sweep
from ..base import GffpercCommand, add_experiment_arguments, experiment_config


class Command(GffpercCommand):
    help = "Estimate every configured event over the delta list and write a CSV table"

    def add_arguments(self, parser):
        add_experiment_arguments(parser)
        parser.add_argument("--timing", action="store_true", help="fill the seconds column")

    def handle(self, *args, **options):
        config = experiment_config(options)
        if options.get("timing"):
            config.timing = True
        try:
            result = sweep(config)
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        if config.out is None:
            self.stdout.write(result.to_csv(), ending="")
        else:
            return str(config.out)
