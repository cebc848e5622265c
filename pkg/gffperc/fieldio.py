from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .gff import BCKind, BoundaryCondition, Field
from .lattice import LatticeRect
from .metric import EdgeStates
from .percolation import FirstPassageSets, LevelLinePath

PathLike = Union[str, Path]

# magic, nx, ny, bc tag, lambda, padding -> 32 bytes
_HEADER = struct.Struct("<4sIIId8x")
_MAGIC = b"GFFF"
_BC_TAGS = {BCKind.ZERO: 0, BCKind.ALTERNATING: 1, BCKind.PLUS_ZERO: 2}


def dump_field(path: PathLike, lat: LatticeRect, field: Field) -> None:
    values = np.asarray(field.values, dtype="<f8")
    if values.shape != (lat.n_vertices,):
        raise ValueError("field does not match the lattice")
    header = _HEADER.pack(_MAGIC, lat.nx, lat.ny, _BC_TAGS[field.bc.kind], field.bc.lam)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.tobytes())


def load_field(path: PathLike) -> Tuple[int, int, Field]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for a field header")
    magic, nx, ny, tag, lam = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    kinds = {code: kind for kind, code in _BC_TAGS.items()}
    if tag not in kinds:
        raise ValueError(f"unknown boundary tag {tag}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if values.size != nx * ny:
        raise ValueError("payload size does not match the header")
    bc = BoundaryCondition(kinds[tag], lam)
    return nx, ny, Field(values=values.astype(float), bc=bc)


def write_level_line_csv(path: PathLike, line: LevelLinePath) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "x", "y", "terminal"])
        for i, (x, y) in enumerate(line.points):
            writer.writerow([i, repr(float(x)), repr(float(y)), line.terminal.value])


def write_level_line_svg(path: PathLike, lat: LatticeRect, line: LevelLinePath, scale: float = 400.0) -> None:
    width, height = lat.L * scale, scale
    # SVG y grows downwards
    coords = " ".join(f"{x * scale:.3f},{height - y * scale:.3f}" for x, y in line.points)
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">\n'
        f'  <rect x="0" y="0" width="{width:.3f}" height="{height:.3f}" fill="none" stroke="black"/>\n'
        f'  <polyline points="{coords}" fill="none" stroke="red" stroke-width="1"/>\n'
        "</svg>\n"
    )
    Path(path).write_text(svg, encoding="utf-8")


def write_masks_csv(path: PathLike, lat: LatticeRect, sets: FirstPassageSets) -> None:
    columns = [("left", sets.left), ("right", sets.right), ("bottom", sets.bottom), ("top", sets.top)]
    columns = [(name, mask) for name, mask in columns if mask is not None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "x", "y"] + [name for name, _ in columns])
        for vid in range(lat.n_vertices):
            x, y = lat.coordinates(vid)
            writer.writerow([vid, repr(x), repr(y)] + [int(mask[vid]) for _, mask in columns])


def write_edge_states_csv(path: PathLike, lat: LatticeRect, edges: EdgeStates) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["edge", "u", "v", "open"])
        for eid, (u, v) in enumerate(lat.edges.tolist()):
            writer.writerow([eid, u, v, int(edges.open[eid])])
