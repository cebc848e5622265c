import logging
from pathlib import Path

from ...fieldio import dump_field, write_edge_states_csv, write_level_line_csv, write_level_line_svg, write_masks_csv
from ...gff import BCKind, sample_with_boundary
from ...harness import replica_rng
from ...lattice import build_lattice
from ...metric import sample_edge_states
from ...percolation import first_passage_sets, metric_first_passage_sets, trace_level_line
from ..base import GffpercCommand, add_experiment_arguments, experiment_config

logger = logging.getLogger(__name__)


class Command(GffpercCommand):
    help = "Draw replica 0 of an experiment and dump its field, edge states, level line and clusters"

    def add_arguments(self, parser):
        add_experiment_arguments(parser)

    def handle(self, *args, **options):
        config = experiment_config(options)
        delta = config.deltas[0]
        out = Path(config.out) if config.out is not None else Path("sample")
        out.mkdir(parents=True, exist_ok=True)

        lat = build_lattice(config.L, delta)
        rng = replica_rng(config.seed, delta, 0)
        field = sample_with_boundary(lat, config.boundary_condition, rng)
        edges = sample_edge_states(lat, field, rng)

        dump_field(out / "field.bin", lat, field)
        write_edge_states_csv(out / "edges.csv", lat, edges)
        write_masks_csv(out / "clusters.csv", lat, first_passage_sets(lat, field))
        write_masks_csv(out / "metric_clusters.csv", lat, metric_first_passage_sets(lat, edges))
        written = ["field.bin", "edges.csv", "clusters.csv", "metric_clusters.csv"]

        # the exploration starts at the sign change in corner a
        if config.bc is BCKind.ALTERNATING:
            line = trace_level_line(lat, field)
            write_level_line_csv(out / "level_line.csv", line)
            write_level_line_svg(out / "level_line.svg", lat, line)
            written += ["level_line.csv", "level_line.svg"]
            logger.info("%r, bc=%s, seed=%d: level line ends on %s after %d steps",
                        lat, field.bc, config.seed, line.terminal.value, line.steps)
        else:
            logger.info("%r, bc=%s, seed=%d: no level line without the alternating condition",
                        lat, field.bc, config.seed)

        for name in sorted(written):
            self.stdout.write(str(out / name))
