import csv
import tempfile
import unittest
from pathlib import Path

import numpy as np

from gffperc.fieldio import (
    dump_field,
    load_field,
    write_edge_states_csv,
    write_level_line_csv,
    write_level_line_svg,
    write_masks_csv,
)
from gffperc.gff import BCKind, BoundaryCondition, sample_with_boundary
from gffperc.lattice import build_lattice
from gffperc.metric import sample_edge_states
from gffperc.percolation import first_passage_sets, metric_first_passage_sets, trace_level_line


class FieldIOTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.lat = build_lattice(2, 1 / 8)
        self.field = sample_with_boundary(self.lat, BoundaryCondition.alternating(1.25), 1)


class TestFieldDump(FieldIOTestCase):
    def test_dump_and_load(self) -> None:
        path = self.dir / "field.bin"
        dump_field(path, self.lat, self.field)
        self.assertEqual(path.stat().st_size, 32 + 8 * self.lat.n_vertices)
        nx, ny, loaded = load_field(path)
        self.assertEqual((nx, ny), (self.lat.nx, self.lat.ny))
        self.assertEqual(loaded.bc, self.field.bc)
        np.testing.assert_array_equal(loaded.values, self.field.values)

    def test_zero_bc(self) -> None:
        path = self.dir / "zero.bin"
        dump_field(path, self.lat, sample_with_boundary(self.lat, BoundaryCondition.zero(), 2))
        self.assertIs(load_field(path)[2].bc.kind, BCKind.ZERO)

    def test_bad_magic(self) -> None:
        path = self.dir / "field.bin"
        dump_field(path, self.lat, self.field)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with self.assertRaises(ValueError):
            load_field(path)

    def test_truncated(self) -> None:
        path = self.dir / "field.bin"
        dump_field(path, self.lat, self.field)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with self.assertRaises(ValueError):
            load_field(path)
        path.write_bytes(raw[:10])
        with self.assertRaises(ValueError):
            load_field(path)

    def test_shape_mismatch(self) -> None:
        with self.assertRaises(ValueError):
            dump_field(self.dir / "x.bin", build_lattice(1, 1 / 8), self.field)


class TestTextOutputs(FieldIOTestCase):
    def read_rows(self, path: Path):
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))

    def test_level_line(self) -> None:
        line = trace_level_line(self.lat, self.field)
        csv_path, svg_path = self.dir / "line.csv", self.dir / "line.svg"
        write_level_line_csv(csv_path, line)
        write_level_line_svg(svg_path, self.lat, line)

        rows = self.read_rows(csv_path)
        self.assertEqual(rows[0], ["step", "x", "y", "terminal"])
        self.assertEqual(len(rows) - 1, len(line.points))
        self.assertEqual({r[3] for r in rows[1:]}, {line.terminal.value})
        self.assertEqual(float(rows[1][1]), 0.0)

        svg = svg_path.read_text(encoding="utf-8")
        self.assertTrue(svg.startswith("<svg"))
        self.assertIn('width="800"', svg)
        self.assertEqual(svg.count("<polyline"), 1)

    def test_masks(self) -> None:
        path = self.dir / "clusters.csv"
        sets = first_passage_sets(self.lat, self.field)
        write_masks_csv(path, self.lat, sets)
        rows = self.read_rows(path)
        self.assertEqual(rows[0], ["vertex", "x", "y", "left", "right", "bottom", "top"])
        self.assertEqual(len(rows) - 1, self.lat.n_vertices)
        left = [int(r[3]) for r in rows[1:]]
        self.assertEqual(sum(left), int(sets.left.sum()))

    def test_metric_masks_and_edges(self) -> None:
        edges = sample_edge_states(self.lat, self.field, 1)
        masks, states = self.dir / "metric.csv", self.dir / "edges.csv"
        write_masks_csv(masks, self.lat, metric_first_passage_sets(self.lat, edges))
        write_edge_states_csv(states, self.lat, edges)
        self.assertEqual(self.read_rows(masks)[0], ["vertex", "x", "y", "left", "right"])
        rows = self.read_rows(states)
        self.assertEqual(len(rows) - 1, self.lat.n_edges)
        self.assertEqual(sum(int(r[3]) for r in rows[1:]), edges.n_open)


if __name__ == "__main__":
    unittest.main()
