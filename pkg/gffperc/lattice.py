from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np

# ----------------------------
# Arc labels
# ----------------------------


class ArcSelector(Enum):
    LEFT = "left"
    BOTTOM = "bottom"
    RIGHT = "right"
    TOP = "top"
    INNER_LEFT = "inner_left"
    INNER_RIGHT = "inner_right"


# codes stored in LatticeRect.arc_label; -1 marks interior vertices
INTERIOR = -1
ARC_CODES: Dict[ArcSelector, int] = {
    ArcSelector.LEFT: 0,
    ArcSelector.BOTTOM: 1,
    ArcSelector.RIGHT: 2,
    ArcSelector.TOP: 3,
}

_RATIO_TOL = 1e-9
_GUARD_TOL = 1e-12


# ----------------------------
# LatticeRect
# ----------------------------


@dataclass(frozen=True, eq=False)
class LatticeRect:
    """V_delta = R_L intersected with delta * Z^2, R_L = (0, L) x (0, 1).

    Grid column ix = 0..nx-1 sits at x = (ix + 1) * delta, row jy = 0..ny-1 at
    y = (jy + 1) * delta. Vertex ids are row-major: id = jy * nx + ix.
    """

    L: float
    delta: float
    nx: int
    ny: int
    arc_label: np.ndarray
    corners: Dict[str, int]
    edges: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.nx * self.ny

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def boundary_mask(self) -> np.ndarray:
        return self.arc_label != INTERIOR

    @property
    def interior_shape(self) -> Tuple[int, int]:
        """(rows, columns) of the interior block V_delta^o."""
        return max(self.ny - 2, 0), max(self.nx - 2, 0)

    @property
    def interior_ids(self) -> np.ndarray:
        return np.flatnonzero(self.arc_label == INTERIOR)

    def vertex_id(self, ix: int, jy: int) -> int:
        if not (0 <= ix < self.nx and 0 <= jy < self.ny):
            raise ValueError(f"grid position ({ix}, {jy}) outside the lattice")
        return jy * self.nx + ix

    def grid_position(self, vid: int) -> Tuple[int, int]:
        return vid % self.nx, vid // self.nx

    def coordinates(self, vid: int) -> Tuple[float, float]:
        ix, jy = self.grid_position(vid)
        return (ix + 1) * self.delta, (jy + 1) * self.delta

    def neighbours(self, vid: int) -> List[int]:
        ix, jy = self.grid_position(vid)
        out = []
        if ix > 0:
            out.append(vid - 1)
        if ix < self.nx - 1:
            out.append(vid + 1)
        if jy > 0:
            out.append(vid - self.nx)
        if jy < self.ny - 1:
            out.append(vid + self.nx)
        return out

    def in_arc(self, vid: int, which: ArcSelector) -> bool:
        return int(self.arc_label[vid]) == ARC_CODES[which]

    def edge_index(self, u: int, v: int) -> int:
        """Id of the edge {u, v}; horizontal edges come first, row-major."""
        u, v = min(u, v), max(u, v)
        ix, jy = self.grid_position(u)
        if v == u + 1 and ix < self.nx - 1:
            return jy * (self.nx - 1) + ix
        if v == u + self.nx:
            return self.ny * (self.nx - 1) + u
        raise ValueError(f"vertices {u} and {v} are not adjacent")

    def boundary_incident_edges(self) -> np.ndarray:
        boundary = self.boundary_mask
        return boundary[self.edges[:, 0]] | boundary[self.edges[:, 1]]

    def __repr__(self) -> str:
        return (
            f"LatticeRect(L={self.L!r}, delta={self.delta!r}, "
            f"nx={self.nx}, ny={self.ny})"
        )


def _extent(length: float, delta: float) -> int:
    ratio = length / delta
    nearest = round(ratio)
    if abs(ratio - nearest) < _RATIO_TOL:
        return int(nearest) - 1
    return int(math.floor(ratio))


def build_lattice(L: float, delta: float) -> LatticeRect:
    if isinstance(L, bool) or not isinstance(L, (int, float)):
        raise TypeError("L must be a real number")
    if isinstance(delta, bool) or not isinstance(delta, (int, float)):
        raise TypeError("delta must be a real number")
    if not (L > 0 and delta > 0) or not (math.isfinite(L) and math.isfinite(delta)):
        raise ValueError("L and delta must be positive and finite")
    if delta > min(L, 1.0) / 3 * (1 + _GUARD_TOL):
        raise ValueError(f"delta={delta} exceeds (L ^ 1)/3={min(L, 1.0) / 3}")

    nx = _extent(float(L), float(delta))
    ny = _extent(1.0, float(delta))

    ix = np.tile(np.arange(nx), ny)
    jy = np.repeat(np.arange(ny), nx)
    label = np.full(nx * ny, INTERIOR, dtype=np.int8)
    # each corner belongs to the arc it starts: a LEFT, b BOTTOM, c RIGHT, d TOP
    label[(ix == nx - 1) & (jy < ny - 1)] = ARC_CODES[ArcSelector.RIGHT]
    label[(jy == ny - 1) & (ix > 0)] = ARC_CODES[ArcSelector.TOP]
    label[(ix == 0) & (jy > 0)] = ARC_CODES[ArcSelector.LEFT]
    label[(jy == 0) & (ix < nx - 1)] = ARC_CODES[ArcSelector.BOTTOM]

    ids = np.arange(nx * ny).reshape(ny, nx)
    horizontal = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vertical = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    edges = np.concatenate([horizontal, vertical]).astype(np.int64)

    corners = {
        "a": int(ids[ny - 1, 0]),
        "b": int(ids[0, 0]),
        "c": int(ids[0, nx - 1]),
        "d": int(ids[ny - 1, nx - 1]),
    }
    return LatticeRect(
        L=float(L),
        delta=float(delta),
        nx=nx,
        ny=ny,
        arc_label=label,
        corners=corners,
        edges=edges,
    )


# ----------------------------
# Arcs
# ----------------------------


def arc_vertices(lat: LatticeRect, which: ArcSelector) -> List[int]:
    """Vertices of an arc in counter-clockwise order."""
    if not isinstance(which, ArcSelector):
        raise TypeError("which must be an ArcSelector")
    nx, ny = lat.nx, lat.ny

    if which is ArcSelector.LEFT:
        return [lat.vertex_id(0, j) for j in range(ny - 1, 0, -1)]
    if which is ArcSelector.BOTTOM:
        return [lat.vertex_id(i, 0) for i in range(0, nx - 1)]
    if which is ArcSelector.RIGHT:
        return [lat.vertex_id(nx - 1, j) for j in range(0, ny - 1)]
    if which is ArcSelector.TOP:
        return [lat.vertex_id(i, ny - 1) for i in range(nx - 1, 0, -1)]

    outer = ArcSelector.LEFT if which is ArcSelector.INNER_LEFT else ArcSelector.RIGHT
    boundary = lat.boundary_mask
    inner: List[int] = []
    for v in arc_vertices(lat, outer):
        for u in lat.neighbours(v):
            if not boundary[u] and u not in inner:
                inner.append(u)
    return inner


def arc_mask(lat: LatticeRect, which: ArcSelector) -> np.ndarray:
    mask = np.zeros(lat.n_vertices, dtype=bool)
    mask[arc_vertices(lat, which)] = True
    return mask


def reflect_vertical(lat: LatticeRect, vid: int) -> int:
    """Mirror image of a vertex across the line x = L/2."""
    ix, jy = lat.grid_position(vid)
    return lat.vertex_id(lat.nx - 1 - ix, jy)
