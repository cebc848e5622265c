from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gff import Field, GreenMatrix
from .lattice import LatticeRect

# ----------------------------
# Types
# ----------------------------


@dataclass(slots=True, frozen=True, eq=False)
class EdgeStates:
    """omega: one bit per edge, True when the metric field stays >= 0 on I_e.

    `positive` is the strict vertex sign mask of the field the bits were drawn
    from; it is None for hand-built states, in which case a vertex counts as
    positive when it carries an open edge.
    """

    open: np.ndarray
    positive: Optional[np.ndarray] = None

    @classmethod
    def from_bits(cls, bits, positive=None) -> "EdgeStates":
        return cls(
            open=np.asarray(bits, dtype=bool).copy(),
            positive=None if positive is None else np.asarray(positive, dtype=bool).copy(),
        )

    def vertex_positive(self, lat: LatticeRect) -> np.ndarray:
        if self.positive is not None:
            return self.positive
        mask = np.zeros(lat.n_vertices, dtype=bool)
        ends = lat.edges[self.open]
        mask[ends[:, 0]] = True
        mask[ends[:, 1]] = True
        return mask

    def with_edge(self, edge: int, state: bool) -> "EdgeStates":
        bits = self.open.copy()
        bits[edge] = state
        return EdgeStates(open=bits, positive=self.positive)

    @property
    def n_open(self) -> int:
        return int(np.count_nonzero(self.open))


@dataclass(slots=True, frozen=True)
class EdgePoint:
    edge: int
    r: float

    def __post_init__(self) -> None:
        if not isinstance(self.edge, (int, np.integer)) or isinstance(self.edge, bool):
            raise TypeError("edge must be an int")
        if not (0.0 <= self.r <= 1.0):
            raise ValueError("r must lie in [0, 1]")


# ----------------------------
# Bridge positivity
# ----------------------------


def edge_open_probability(phi_u: float, phi_v: float) -> float:
    """P(bridge between phi_u and phi_v stays >= 0) on a unit lattice edge.

    The bridge has length 2 and variance 2 per unit time, hence the exponent 1/2.
    """
    if math.isnan(phi_u) or math.isnan(phi_v):
        raise ValueError("edge endpoint values must not be NaN")
    product = phi_u * phi_v
    if min(phi_u, phi_v) < 0 or product == 0:
        return 0.0
    return -math.expm1(-product / 2.0)


def edge_open_probabilities(phi_u: np.ndarray, phi_v: np.ndarray) -> np.ndarray:
    phi_u = np.asarray(phi_u, dtype=float)
    phi_v = np.asarray(phi_v, dtype=float)
    if np.isnan(phi_u).any() or np.isnan(phi_v).any():
        raise ValueError("edge endpoint values must not be NaN")
    product = phi_u * phi_v
    alive = (np.minimum(phi_u, phi_v) >= 0) & (product != 0)
    return np.where(alive, -np.expm1(-np.where(alive, product, 0.0) / 2.0), 0.0)


def sample_edge_states(lat: LatticeRect, field: Field, rng_seed=None) -> EdgeStates:
    values = np.asarray(field.values, dtype=float)
    if values.shape != (lat.n_vertices,):
        raise ValueError("field does not match the lattice")
    rng = np.random.default_rng(rng_seed)
    p = edge_open_probabilities(values[lat.edges[:, 0]], values[lat.edges[:, 1]])
    bits = rng.random(lat.n_edges) < p
    return EdgeStates(open=bits, positive=values > 0)


# ----------------------------
# Metric Green function
# ----------------------------


def metric_green(lat: LatticeRect, G: GreenMatrix, w1: EdgePoint, w2: EdgePoint) -> float:
    if not G.matches(lat):
        raise ValueError("Green matrix was built on a different lattice")
    for w in (w1, w2):
        if not (0 <= w.edge < lat.n_edges):
            raise ValueError(f"edge {w.edge} outside the lattice")

    u1, v1 = (int(x) for x in lat.edges[w1.edge])
    u2, v2 = (int(x) for x in lat.edges[w2.edge])
    r1, r2 = w1.r, w2.r

    value = (
        (1 - r1) * (1 - r2) * G.vertex_green(u1, u2)
        + (1 - r1) * r2 * G.vertex_green(u1, v2)
        + r1 * (1 - r2) * G.vertex_green(v1, u2)
        + r1 * r2 * G.vertex_green(v1, v2)
    )
    if w1.edge == w2.edge:
        value += 4.0 * (min(r1, r2) - r1 * r2)
    return float(value)
