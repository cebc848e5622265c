from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from . import oracles, settings
from .exceptions import InvariantViolation
from .gff import (
    BoundaryCondition,
    boundary_values,
    dirichlet_green_dense,
    green_diagonal_slope,
    harmonic_extension,
    sample_with_boundary,
    sample_zero_boundary,
)
from .lattice import ArcSelector, build_lattice
from .limits import (
    bm_line_hitting_cdf,
    coordinate_change_path,
    crossing_limit,
    elliptic_k_complete,
    half_plane_force_points,
    modulus_for_aspect,
    simulate_sle_diffusion,
    sle_hitting_batch,
    sle_hitting_probability,
)
from .metric import EdgeStates, edge_open_probability
from .percolation import CrossingMode, closed_pivotal_exists, crossing, trace_level_line

logger = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class SelftestSizes:
    covariance_samples: int
    green_walks: int
    bridge_steps: int
    bridge_paths: int
    crossing_instances: int
    pivotal_instances: int
    level_line_samples: int
    sle_paths: int
    sle_dt: float
    halve_dt: bool
    roundtrip_paths: int
    line_paths: int
    line_dt: float


QUICK = SelftestSizes(
    covariance_samples=20_000,
    green_walks=100_000,
    bridge_steps=2**10,
    bridge_paths=20_000,
    crossing_instances=500,
    pivotal_instances=100,
    level_line_samples=300,
    sle_paths=4_000,
    sle_dt=1e-3,
    halve_dt=False,
    roundtrip_paths=10,
    line_paths=20_000,
    line_dt=1e-3,
)

FULL = SelftestSizes(
    covariance_samples=200_000,
    green_walks=1_000_000,
    bridge_steps=2**14,
    bridge_paths=1_000_000,
    crossing_instances=10_000,
    pivotal_instances=1_000,
    level_line_samples=10_000,
    sle_paths=100_000,
    sle_dt=1e-4,
    halve_dt=True,
    roundtrip_paths=100,
    line_paths=100_000,
    line_dt=1e-4,
)


@dataclass(slots=True, frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def __str__(self) -> str:
        status = "ok  " if self.passed else "FAIL"
        return f"{status} {self.name:<28} {self.detail} ({self.seconds:.1f}s)"


# ----------------------------
# gff
# ----------------------------


def check_sampler_covariance(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    lat = build_lattice(1.0, 1 / 10)
    G = dirichlet_green_dense(lat).matrix
    ids = lat.interior_ids
    n = sizes.covariance_samples
    samples = np.empty((n, ids.size))
    for i in range(n):
        samples[i] = sample_zero_boundary(lat, rng).values[ids]
    empirical = samples.T @ samples / n
    stderr = np.sqrt((np.outer(np.diag(G), np.diag(G)) + G * G) / n)
    worst = float(np.max(np.abs(empirical - G) / stderr))
    return CheckResult("sampler covariance", worst <= 5.0, f"max |z| = {worst:.2f} over {G.size} entries")


def check_green_random_walk(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    lat = build_lattice(1.0, 1 / 8)
    center = lat.vertex_id(3, 3)
    exact = dirichlet_green_dense(lat).vertex_green(center, center)
    mc = oracles.random_walk_green(lat, center, sizes.green_walks, rng)
    return CheckResult(
        "green vs random walk",
        mc.within(exact, 3.0),
        f"G = {exact:.5f}, walks {mc.mean:.5f} +- {mc.stderr:.5f}",
    )


def check_harmonic_exit(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    lat = build_lattice(2.0, 1 / 8)
    bc = BoundaryCondition.alternating(1.0)
    data = boundary_values(lat, bc)
    vid = lat.vertex_id(7, 3)
    exact = float(harmonic_extension(lat, data, bc).values[vid])
    mc = oracles.random_walk_exit(lat, vid, data, sizes.green_walks, rng)
    return CheckResult(
        "harmonic extension vs exit",
        mc.within(exact, 3.0),
        f"h = {exact:.5f}, walks {mc.mean:.5f} +- {mc.stderr:.5f}",
    )


def check_green_growth(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    fit = green_diagonal_slope()
    low, high = settings.GREEN_SLOPE_BAND
    return CheckResult(
        "green diagonal growth",
        low <= fit.slope <= high,
        f"slope {fit.slope:.4f} per log(distance), expected in [{low}, {high}] (2/pi = {2 / math.pi:.4f})",
    )


# ----------------------------
# metric
# ----------------------------


def check_bridge_minimum(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    exact = edge_open_probability(1.0, 1.0)
    mc = oracles.bridge_positive_probability(1.0, 1.0, sizes.bridge_steps, sizes.bridge_paths, rng)
    # discrete monitoring misses excursions below 0 between grid points
    allowance = 1.0 / math.sqrt(sizes.bridge_steps)
    return CheckResult(
        "bridge positivity",
        mc.within(exact, 3.0, allowance),
        f"1 - e^-1/2 = {exact:.6f}, bridges {mc.mean:.6f} +- {mc.stderr:.6f}",
    )


# ----------------------------
# percolation
# ----------------------------


def _random_edges(lat, rng: np.random.Generator) -> EdgeStates:
    return EdgeStates.from_bits(rng.random(lat.n_edges) < 0.5, positive=rng.random(lat.n_vertices) < 0.7)


def check_crossing_oracle(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    lat = build_lattice(1.0, 1 / 21)
    mismatches = 0
    for _ in range(sizes.crossing_instances):
        field = sample_with_boundary(lat, BoundaryCondition.alternating(1.0), rng)
        edges = _random_edges(lat, rng)
        for mode in CrossingMode:
            data = edges if mode.is_metric else field
            mismatches += crossing(lat, data, mode) != oracles.flood_fill_crossing(lat, data, mode)
    return CheckResult(
        "union-find vs flood fill",
        mismatches == 0,
        f"{mismatches} mismatches on {sizes.crossing_instances} instances x 4 modes",
    )


def check_pivotal_oracle(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    lat = build_lattice(1.0, 1 / 11)
    mismatches = 0
    for _ in range(sizes.pivotal_instances):
        edges = _random_edges(lat, rng)
        exists, pivotal = closed_pivotal_exists(lat, edges)
        ref_exists, ref_pivotal = oracles.brute_force_pivotals(lat, edges)
        mismatches += exists != ref_exists or sorted(pivotal) != sorted(ref_pivotal)
    return CheckResult(
        "pivotal vs toggle-all",
        mismatches == 0,
        f"{mismatches} mismatches on {sizes.pivotal_instances} instances",
    )


def check_level_line(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    lat = build_lattice(1.0, 1 / 16)
    bc = BoundaryCondition.alternating(settings.LAMBDA0)
    mismatches = 0
    for _ in range(sizes.level_line_samples):
        field = sample_with_boundary(lat, bc, rng)
        reached_right = trace_level_line(lat, field).terminal is ArcSelector.RIGHT
        mismatches += reached_right != crossing(lat, field, CrossingMode.DISCRETE_ALT)
    if mismatches:
        logger.warning("level line terminal disagrees with the crossing on %d samples", mismatches)
    return CheckResult(
        "level line terminal",
        mismatches == 0,
        f"{mismatches} mismatches on {sizes.level_line_samples} samples",
    )


# ----------------------------
# limits
# ----------------------------


def check_conformal_limits(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    k_err = abs(elliptic_k_complete(1 / math.sqrt(2)) - oracles.quadrature_elliptic_k(1 / math.sqrt(2)))
    square = abs(crossing_limit(1.0) - 0.5)
    oracle = abs(crossing_limit(2.0) - oracles.quadrature_crossing_limit(2.0))
    yL, yR = half_plane_force_points(modulus_for_aspect(2.0))
    shift = abs(sle_hitting_probability(yL, yR) - crossing_limit(2.0))
    passed = k_err < 1e-10 and square < 1e-10 and oracle < 1e-8 and shift < 1e-12
    return CheckResult(
        "conformal limit",
        passed,
        f"K {k_err:.1e}, L=1 {square:.1e}, L=2 vs quadrature {oracle:.1e}, half-plane {shift:.1e}",
    )


def check_sle_hitting(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    parts, passed = [], True
    for x0 in (-0.5, 0.0, 0.5):
        expected = (1 + x0) / 2
        sample = sle_hitting_batch(x0, sizes.sle_dt, sizes.sle_paths, rng)
        p = sample.plus / sample.n
        se = math.sqrt(expected * (1 - expected) / sample.n)
        ok = abs(p - expected) <= 3 * se and sample.unabsorbed == 0
        if sizes.halve_dt:
            halved = sle_hitting_batch(x0, sizes.sle_dt / 2, sizes.sle_paths, rng)
            ok = ok and abs(halved.plus / halved.n - p) <= 2 * math.sqrt(2) * se
        passed = passed and ok
        parts.append(f"x0={x0:+.1f}: {p:.4f} vs {expected:.2f}")
    return CheckResult("sle hitting", passed, ", ".join(parts))


def check_coordinate_change(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    dt = sizes.sle_dt
    worst, monotone = 0.0, 0
    for _ in range(sizes.roundtrip_paths):
        path = simulate_sle_diffusion(rng.uniform(-0.9, 0.9), dt, rng)
        changed = coordinate_change_path(path)
        worst = max(worst, float(np.max(np.abs(changed.recovered() - path.values))))
        monotone += bool(np.all(np.diff(changed.VL) <= 0) and np.all(np.diff(changed.VR) >= 0))
    passed = worst < 10 * dt and monotone == sizes.roundtrip_paths
    return CheckResult(
        "coordinate change",
        passed,
        f"max recovery error {worst:.2e} (< {10 * dt:.0e}), monotone {monotone}/{sizes.roundtrip_paths}",
    )


def check_line_hitting(sizes: SelftestSizes, rng: np.random.Generator) -> CheckResult:
    parts, passed = [], True
    for m, b, T in ((0.3, 1.0, 2.0), (0.0, 1.0, 1.0), (-0.5, 0.5, 2.0)):
        exact = bm_line_hitting_cdf(m, b, T)
        mc = oracles.line_first_passage_probability(m, b, T, sizes.line_dt, sizes.line_paths, rng)
        # grid monitoring only ever misses crossings
        allowance = 1.5 * math.sqrt(sizes.line_dt)
        passed = passed and mc.within(exact, 3.0, allowance)
        parts.append(f"({m}, {b}, {T}): {exact:.4f} vs {mc.mean:.4f}")
    tail = abs(bm_line_hitting_cdf(-0.3, 1.0, 1e8) - math.exp(-0.6))
    passed = passed and tail < 1e-6
    parts.append(f"T->inf {tail:.1e}")
    return CheckResult("line hitting", passed, ", ".join(parts))


CHECKS: List[Callable[[SelftestSizes, np.random.Generator], CheckResult]] = [
    check_sampler_covariance,
    check_green_random_walk,
    check_harmonic_exit,
    check_green_growth,
    check_bridge_minimum,
    check_crossing_oracle,
    check_pivotal_oracle,
    check_level_line,
    check_conformal_limits,
    check_sle_hitting,
    check_coordinate_change,
    check_line_hitting,
]


def run_selftest(full: bool = False, seed: int = settings.DEFAULT_SEED, only: Optional[List[str]] = None) -> List[CheckResult]:
    sizes = FULL if full else QUICK
    results: List[CheckResult] = []
    for index, check in enumerate(CHECKS):
        name = check.__name__.removeprefix("check_")
        if only and name not in only:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
        started = time.perf_counter()
        try:
            result = check(sizes, rng)
        except InvariantViolation as exc:
            result = CheckResult(name, False, f"invariant violated: {exc}")
        result = CheckResult(result.name, result.passed, result.detail, time.perf_counter() - started)
        logger.info("%s", result)
        results.append(result)
    return results
