import logging
from pathlib import Path

from ...harness import SweepResult, SweepRow, estimate_event
from ..base import GffpercCommand, add_experiment_arguments, experiment_config

logger = logging.getLogger(__name__)


class Command(GffpercCommand):
    help = "Monte Carlo estimate of each configured event at the first delta"

    def add_arguments(self, parser):
        add_experiment_arguments(parser)

    def handle(self, *args, **options):
        config = experiment_config(options)
        delta = config.deltas[0]
        result = SweepResult(config=config)
        for event in config.events:
            estimate = estimate_event(config, event, delta)
            result.rows.append(
                SweepRow(L=config.L, lam=config.lambda_label, bc=config.bc.value,
                         event=event.value, delta=delta, estimate=estimate)
            )
            limit = config.conformal_limit(event)
            if limit is not None:
                logger.info("%s bc=%s lambda=%s: conformal limit at L=%g is %.6f, estimate is %+.4f away",
                            event.value, config.bc.value, config.lambda_label, config.L, limit,
                            estimate.p_hat - limit)

        if config.out is not None:
            Path(config.out).write_text(result.to_csv(), encoding="utf-8", newline="")
            return str(config.out)
        self.stdout.write(result.to_csv(), ending="")
