from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Optional, Set, Tuple, Union

import numpy as np

from .exceptions import InvariantViolation
from .gff import Field
from .lattice import ARC_CODES, ArcSelector, LatticeRect, arc_vertices
from .metric import EdgeStates

logger = logging.getLogger(__name__)

# ----------------------------
# Types
# ----------------------------


class CrossingMode(Enum):
    DISCRETE_ALT = "discrete_alt"
    DISCRETE_ZERO = "discrete_zero"
    METRIC_ALT = "metric_alt"
    METRIC_ZERO = "metric_zero"

    @property
    def is_metric(self) -> bool:
        return self in (CrossingMode.METRIC_ALT, CrossingMode.METRIC_ZERO)

    @property
    def arcs(self) -> Tuple[ArcSelector, ArcSelector]:
        if self in (CrossingMode.DISCRETE_ALT, CrossingMode.METRIC_ALT):
            return ArcSelector.LEFT, ArcSelector.RIGHT
        return ArcSelector.INNER_LEFT, ArcSelector.INNER_RIGHT


@dataclass(slots=True, frozen=True, eq=False)
class FirstPassageSets:
    """Vertex masks of the sign clusters attached to each side.

    Metric sets only carry `left`/`right` (plus the open edges inside them);
    omega does not determine the non-positive clusters.
    """

    left: np.ndarray
    right: np.ndarray
    bottom: Optional[np.ndarray] = None
    top: Optional[np.ndarray] = None
    left_edges: Optional[np.ndarray] = None
    right_edges: Optional[np.ndarray] = None

    @property
    def crossing(self) -> bool:
        return bool(np.any(self.left & self.right))


@dataclass(slots=True, frozen=True, eq=False)
class LevelLinePath:
    """points[0] is b_delta^diamond on the left side of R_L, the rest are
    dual vertices; the last one lies just outside the face grid."""

    points: np.ndarray
    terminal: ArcSelector
    steps: int


# ----------------------------
# Union-find
# ----------------------------


class UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        i, j = self.find(x), self.find(y)
        if i == j:
            return
        if self.rank[i] < self.rank[j]:
            i, j = j, i
        self.parent[j] = i
        if self.rank[i] == self.rank[j]:
            self.rank[i] += 1

    def linked(self, x: int, y: int) -> bool:
        return self.find(x) == self.find(y)

    def roots(self) -> np.ndarray:
        return np.fromiter((self.find(i) for i in range(len(self.parent))), dtype=np.int64)


# ----------------------------
# Helpers
# ----------------------------


@lru_cache(maxsize=64)
def _arc_array(lat: LatticeRect, which: ArcSelector) -> np.ndarray:
    return np.asarray(arc_vertices(lat, which), dtype=np.int64)


@lru_cache(maxsize=64)
def _interior_edge_mask(lat: LatticeRect) -> np.ndarray:
    return ~lat.boundary_incident_edges()


def _reach(lat: LatticeRect, allowed: np.ndarray, sources: Iterable[int]) -> np.ndarray:
    """Vertices joined to `sources` by nearest-neighbour paths inside `allowed`."""
    nx, ny = lat.nx, lat.ny
    allowed = np.asarray(allowed, dtype=bool).tolist()
    seen = [False] * lat.n_vertices
    queue = deque()
    for s in np.asarray(sources, dtype=np.int64).tolist():
        if allowed[s] and not seen[s]:
            seen[s] = True
            queue.append(s)
    while queue:
        v = queue.popleft()
        ix = v % nx
        candidates = []
        if ix > 0:
            candidates.append(v - 1)
        if ix < nx - 1:
            candidates.append(v + 1)
        if v >= nx:
            candidates.append(v - nx)
        if v < nx * (ny - 1):
            candidates.append(v + nx)
        for u in candidates:
            if allowed[u] and not seen[u]:
                seen[u] = True
                queue.append(u)
    return np.asarray(seen, dtype=bool)


def _values(lat: LatticeRect, field: Field) -> np.ndarray:
    if not isinstance(field, Field):
        raise TypeError("discrete modes take a Field")
    values = np.asarray(field.values, dtype=float)
    if values.shape != (lat.n_vertices,):
        raise ValueError("field does not match the lattice")
    return values


def _edge_bits(lat: LatticeRect, edges: EdgeStates) -> np.ndarray:
    if not isinstance(edges, EdgeStates):
        raise TypeError("metric modes take EdgeStates")
    if edges.open.shape != (lat.n_edges,):
        raise ValueError("edge states do not match the lattice")
    return edges.open


def _metric_union_find(
    lat: LatticeRect, edges: EdgeStates, mode: CrossingMode
) -> Tuple[UnionFind, int, int]:
    bits = _edge_bits(lat, edges)
    if mode is CrossingMode.METRIC_ZERO:
        bits = bits & _interior_edge_mask(lat)
    n = lat.n_vertices
    source, target = n, n + 1
    uf = UnionFind(n + 2)
    for u, v in lat.edges[bits].tolist():
        uf.union(u, v)

    src_arc, dst_arc = mode.arcs
    src, dst = _arc_array(lat, src_arc), _arc_array(lat, dst_arc)
    if mode is CrossingMode.METRIC_ZERO:
        positive = edges.vertex_positive(lat)
        src, dst = src[positive[src]], dst[positive[dst]]
    for v in src.tolist():
        uf.union(source, v)
    for v in dst.tolist():
        uf.union(target, v)
    return uf, source, target


# ----------------------------
# Crossing events
# ----------------------------


def crossing(lat: LatticeRect, data: Union[Field, EdgeStates], mode: CrossingMode) -> bool:
    if not isinstance(mode, CrossingMode):
        raise TypeError("mode must be a CrossingMode")

    if mode.is_metric:
        uf, source, target = _metric_union_find(lat, data, mode)
        return uf.linked(source, target)

    values = _values(lat, data)
    allowed = values >= 0 if mode is CrossingMode.DISCRETE_ALT else values > 0
    src_arc, dst_arc = mode.arcs
    reached = _reach(lat, allowed, _arc_array(lat, src_arc))
    return bool(np.any(reached[_arc_array(lat, dst_arc)]))


def negative_vertical_crossing(lat: LatticeRect, field: Field) -> bool:
    """BOTTOM joined to TOP through strictly negative vertices."""
    values = _values(lat, field)
    reached = _reach(lat, values < 0, _arc_array(lat, ArcSelector.BOTTOM))
    return bool(np.any(reached[_arc_array(lat, ArcSelector.TOP)]))


def first_passage_sets(lat: LatticeRect, field: Field) -> FirstPassageSets:
    values = _values(lat, field)
    nonneg, nonpos = values >= 0, values <= 0
    return FirstPassageSets(
        left=_reach(lat, nonneg, _arc_array(lat, ArcSelector.LEFT)),
        right=_reach(lat, nonneg, _arc_array(lat, ArcSelector.RIGHT)),
        bottom=_reach(lat, nonpos, _arc_array(lat, ArcSelector.BOTTOM)),
        top=_reach(lat, nonpos, _arc_array(lat, ArcSelector.TOP)),
    )


def metric_first_passage_sets(lat: LatticeRect, edges: EdgeStates) -> FirstPassageSets:
    bits = _edge_bits(lat, edges)
    uf = UnionFind(lat.n_vertices)
    for u, v in lat.edges[bits].tolist():
        uf.union(u, v)
    roots = uf.roots()
    positive = edges.vertex_positive(lat)

    def attached(which: ArcSelector) -> Tuple[np.ndarray, np.ndarray]:
        seeds = _arc_array(lat, which)
        seeds = seeds[positive[seeds]]
        mask = np.isin(roots, roots[seeds])
        return mask, bits & mask[lat.edges[:, 0]]

    left, left_edges = attached(ArcSelector.LEFT)
    right, right_edges = attached(ArcSelector.RIGHT)
    return FirstPassageSets(left=left, right=right, left_edges=left_edges, right_edges=right_edges)


# ----------------------------
# Closed pivotal edges
# ----------------------------


def closed_pivotal_exists(lat: LatticeRect, edges: EdgeStates) -> Tuple[bool, List[int]]:
    uf, source, target = _metric_union_find(lat, edges, CrossingMode.METRIC_ALT)
    if uf.linked(source, target):
        return False, []

    roots = uf.roots()
    root_left, root_right = roots[source], roots[target]
    ru, rv = roots[lat.edges[:, 0]], roots[lat.edges[:, 1]]
    joins = ((ru == root_left) & (rv == root_right)) | ((ru == root_right) & (rv == root_left))
    pivotal = np.flatnonzero(joins & ~edges.open)
    return bool(pivotal.size), [int(e) for e in pivotal]


# ----------------------------
# Level line
# ----------------------------

_Vec = Tuple[int, int]


def _left_of(d: _Vec) -> _Vec:
    return -d[1], d[0]


def _corner(lat: LatticeRect, face: _Vec, s: _Vec) -> int:
    # face is indexed by its lower-left primal vertex; s in {-1, 1}^2
    return lat.vertex_id(face[0] + (1 + s[0]) // 2, face[1] + (1 + s[1]) // 2)


def _level_line_signs(lat: LatticeRect, values: np.ndarray) -> np.ndarray:
    label = lat.arc_label
    positive = values >= 0
    positive[(label == ARC_CODES[ArcSelector.LEFT]) | (label == ARC_CODES[ArcSelector.RIGHT])] = True
    positive[(label == ARC_CODES[ArcSelector.BOTTOM]) | (label == ARC_CODES[ArcSelector.TOP])] = False
    return positive


def trace_level_line(lat: LatticeRect, field: Field) -> LevelLinePath:
    """Interface between weakly positive vertices (left) and negative ones (right).

    Frame vertices take the sign of their arc, interior ones the sign of the
    field; at a saddle the line turns left.
    """
    positive = _level_line_signs(lat, _values(lat, field))
    delta = lat.delta
    max_steps = 4 * lat.n_edges

    def inside(face: _Vec) -> bool:
        return 0 <= face[0] <= lat.nx - 2 and 0 <= face[1] <= lat.ny - 2

    def center(face: _Vec) -> Tuple[float, float]:
        return (face[0] + 1.5) * delta, (face[1] + 1.5) * delta

    face: _Vec = (-1, 0)
    heading: _Vec = (1, 0)
    points = [(0.0, 1.5 * delta), center(face)]
    visited: Set[Tuple[_Vec, _Vec]] = set()
    steps = 0

    while True:
        if (face, heading) in visited:
            raise InvariantViolation(f"level line revisits dual edge {face}->{heading}")
        visited.add((face, heading))

        lft = _left_of(heading)
        left_v = _corner(lat, face, (heading[0] + lft[0], heading[1] + lft[1]))
        right_v = _corner(lat, face, (heading[0] - lft[0], heading[1] - lft[1]))
        if not (positive[left_v] and not positive[right_v]):
            raise InvariantViolation(f"level line crossed edge ({left_v}, {right_v}) with wrong signs")

        face = (face[0] + heading[0], face[1] + heading[1])
        points.append(center(face))
        steps += 1
        if steps > max_steps:
            raise InvariantViolation("level line exceeded 4 |E| steps")

        if not inside(face):
            if lat.in_arc(left_v, ArcSelector.RIGHT):
                terminal = ArcSelector.RIGHT
            elif lat.in_arc(right_v, ArcSelector.TOP):
                terminal = ArcSelector.TOP
            else:
                raise InvariantViolation(f"level line left the domain across ({left_v}, {right_v})")
            return LevelLinePath(points=np.asarray(points), terminal=terminal, steps=steps)

        ahead_left = _corner(lat, face, (heading[0] + lft[0], heading[1] + lft[1]))
        ahead_right = _corner(lat, face, (heading[0] - lft[0], heading[1] - lft[1]))
        if not positive[ahead_left]:
            heading = lft
        elif positive[ahead_right]:
            heading = (-lft[0], -lft[1])
