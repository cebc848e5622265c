"""Slow, independent reference implementations.

Nothing in the library calls these; tests and `selftest` compare the fast
code paths against them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from scipy import ndimage
from scipy.integrate import quad
from scipy.optimize import brentq

from .gff import Field
from .lattice import LatticeRect, arc_vertices
from .metric import EdgeStates
from .percolation import CrossingMode


@dataclass(slots=True, frozen=True)
class MonteCarloValue:
    mean: float
    stderr: float
    n: int

    def within(self, value: float, n_se: float, allowance: float = 0.0) -> bool:
        return abs(self.mean - value) <= n_se * self.stderr + allowance


def _summary(samples: np.ndarray) -> MonteCarloValue:
    samples = np.asarray(samples, dtype=float)
    return MonteCarloValue(
        mean=float(samples.mean()),
        stderr=float(samples.std(ddof=1) / math.sqrt(samples.size)),
        n=int(samples.size),
    )


# ----------------------------
# Clusters
# ----------------------------


def flood_fill_reach(lat: LatticeRect, allowed: np.ndarray, sources) -> np.ndarray:
    """Vertex mask of the 4-connected components of `allowed` that meet `sources`."""
    grid = np.asarray(allowed, dtype=bool).reshape(lat.ny, lat.nx)
    labels, _ = ndimage.label(grid)
    labels = labels.ravel()
    hit = {int(labels[s]) for s in sources if labels[s] != 0}
    return np.isin(labels, list(hit)) if hit else np.zeros(lat.n_vertices, dtype=bool)


def _open_flood(lat: LatticeRect, bits: np.ndarray, sources: List[int]) -> np.ndarray:
    adjacency: List[List[int]] = [[] for _ in range(lat.n_vertices)]
    for (u, v), is_open in zip(lat.edges.tolist(), bits.tolist()):
        if is_open:
            adjacency[u].append(v)
            adjacency[v].append(u)
    seen = np.zeros(lat.n_vertices, dtype=bool)
    stack = list(sources)
    seen[stack] = True
    while stack:
        v = stack.pop()
        for u in adjacency[v]:
            if not seen[u]:
                seen[u] = True
                stack.append(u)
    return seen


def flood_fill_crossing(lat: LatticeRect, data: Union[Field, EdgeStates], mode: CrossingMode) -> bool:
    src_arc, dst_arc = mode.arcs
    src, dst = arc_vertices(lat, src_arc), arc_vertices(lat, dst_arc)

    if not mode.is_metric:
        values = np.asarray(data.values)
        allowed = values >= 0 if mode is CrossingMode.DISCRETE_ALT else values > 0
        return bool(flood_fill_reach(lat, allowed, src)[dst].any())

    bits = np.asarray(data.open, dtype=bool)
    if mode is CrossingMode.METRIC_ZERO:
        boundary = lat.boundary_mask
        bits = bits & ~(boundary[lat.edges[:, 0]] | boundary[lat.edges[:, 1]])
        positive = data.vertex_positive(lat)
        src = [v for v in src if positive[v]]
        dst = [v for v in dst if positive[v]]
    return bool(_open_flood(lat, bits, src)[dst].any())


def brute_force_pivotals(lat: LatticeRect, edges: EdgeStates) -> Tuple[bool, List[int]]:
    """Open each closed edge in turn and look for a LEFT-RIGHT crossing."""
    if flood_fill_crossing(lat, edges, CrossingMode.METRIC_ALT):
        return False, []
    pivotal = [
        e
        for e in np.flatnonzero(~edges.open).tolist()
        if flood_fill_crossing(lat, edges.with_edge(e, True), CrossingMode.METRIC_ALT)
    ]
    return bool(pivotal), pivotal


# ----------------------------
# Random walks
# ----------------------------


def _walk(lat: LatticeRect, start: int, n_walks: int, rng) -> Tuple[np.ndarray, np.ndarray]:
    """Simple random walks from `start`, stopped on the frame.

    Returns (exit vertex, number of visits to `start`) per walk.
    """
    boundary = lat.boundary_mask
    moves = np.array([1, -1, lat.nx, -lat.nx])
    position = np.full(n_walks, start, dtype=np.int64)
    visits = np.zeros(n_walks)
    alive = np.flatnonzero(~boundary[position])
    while alive.size:
        visits[alive] += position[alive] == start
        position[alive] += moves[rng.integers(0, 4, alive.size)]
        alive = alive[~boundary[position[alive]]]
    return position, visits


def random_walk_green(lat: LatticeRect, vid: int, n_walks: int, rng_seed=None) -> MonteCarloValue:
    """Expected time spent at `vid` by a rate-1 walk started there and killed on the frame."""
    _, visits = _walk(lat, vid, n_walks, np.random.default_rng(rng_seed))
    return _summary(visits)


def random_walk_exit(lat: LatticeRect, vid: int, data: np.ndarray, n_walks: int, rng_seed=None) -> MonteCarloValue:
    """E_v[data(S_zeta)] for the walk stopped on the frame."""
    exits, _ = _walk(lat, vid, n_walks, np.random.default_rng(rng_seed))
    return _summary(np.asarray(data, dtype=float)[exits])


# ----------------------------
# Brownian paths
# ----------------------------


def bridge_positive_probability(
    a: float,
    b: float,
    n_steps: int,
    n_paths: int,
    rng_seed=None,
    chunk: int = 4096,
) -> MonteCarloValue:
    """P(min > 0) for a bridge from a to b with total variance 4, monitored on a grid."""
    rng = np.random.default_rng(rng_seed)
    t = np.arange(1, n_steps + 1) / n_steps
    hits = np.empty(n_paths)
    for start in range(0, n_paths, chunk):
        m = min(chunk, n_paths - start)
        w = np.cumsum(rng.standard_normal((m, n_steps)), axis=1) / math.sqrt(n_steps)
        bridge = a + (b - a) * t + 2.0 * (w - t * w[:, -1:])
        hits[start : start + m] = bridge.min(axis=1) > 0
    return _summary(hits)


def line_first_passage_probability(
    m: float,
    b: float,
    T: float,
    dt: float,
    n_paths: int,
    rng_seed=None,
) -> MonteCarloValue:
    """P(B_t <= m t - b for some t <= T), monitored every dt."""
    rng = np.random.default_rng(rng_seed)
    n_steps = int(round(T / dt))
    sqrt_dt = math.sqrt(dt)
    position = np.zeros(n_paths)
    hit = np.zeros(n_paths, dtype=bool)
    for step in range(1, n_steps + 1):
        position += sqrt_dt * rng.standard_normal(n_paths)
        hit |= position <= m * step * dt - b
    return _summary(hit)


# ----------------------------
# Quadrature
# ----------------------------

_QUAD = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
_K_MIN = 1e-4


def quadrature_elliptic_k(k: float) -> float:
    value, _ = quad(lambda theta: 1.0 / math.sqrt(1.0 - (k * math.sin(theta)) ** 2), 0.0, math.pi / 2, **_QUAD)
    return value


def _side_integrals(k: float) -> Tuple[float, float]:
    # z(w) = int_0^w dt / sqrt((1 - t^2)(1 - k^2 t^2)); singular factors go into the weight
    half_bottom, _ = quad(
        lambda t: 1.0 / math.sqrt((1.0 + t) * (1.0 - k * k * t * t)), 0.0, 1.0, weight="alg", wvar=(0.0, -0.5), **_QUAD
    )
    side, _ = quad(
        lambda t: 1.0 / math.sqrt((t + 1.0) * k * (1.0 + k * t)),
        1.0,
        1.0 / k,
        weight="alg",
        wvar=(-0.5, -0.5),
        **_QUAD,
    )
    return 2.0 * half_bottom, side


def _modulus_bracket(aspect_gap) -> Tuple[float, float]:
    # aspect ratio grows with k; widen from k = 1/2 and keep off the singular ends
    low, high = 0.5, 0.5
    while aspect_gap(low) > 0:
        low /= 4
        if low < _K_MIN:
            raise ValueError("aspect ratio too small for the quadrature oracle")
    while aspect_gap(high) < 0:
        high = 1.0 - (1.0 - high) / 4
        if 1.0 - high < _K_MIN:
            raise ValueError("aspect ratio too large for the quadrature oracle")
    return low, high


def schwarz_christoffel_corner_images(L: float) -> Tuple[float, float, float, float]:
    """Preimages (a, b, c, d) = (-1/k, -1, 1, 1/k) of the corners of R_L, by direct quadrature."""

    def aspect_gap(k: float) -> float:
        width, height = _side_integrals(k)
        return width / height - L

    low, high = _modulus_bracket(aspect_gap)
    k = brentq(aspect_gap, low, high, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    return -1.0 / k, -1.0, 1.0, 1.0 / k


def quadrature_crossing_limit(L: float) -> float:
    ya, yb, yc, yd = schwarz_christoffel_corner_images(L)
    return (yb - ya) * (yd - yc) / ((yc - ya) * (yd - yb))


