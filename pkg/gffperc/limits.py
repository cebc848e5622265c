from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import log_ndtr, ndtr

from . import settings

# ----------------------------
# Conformal images of the rectangle
# ----------------------------


@dataclass(slots=True, frozen=True)
class ConformalImages:
    """Corner images of R_L on the real line under the sn map: (-1/k, -1, 1, 1/k)."""

    k: float
    k_prime: float
    ya: float
    yb: float
    yc: float
    yd: float

    def cross_ratio(self) -> float:
        return cross_ratio(self.ya, self.yb, self.yc, self.yd)


def _agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = (a + b) / 2.0, math.sqrt(a * b)
    return (a + b) / 2.0


def _k_from_complement(k_prime: float) -> float:
    if k_prime <= 0.0:
        raise ValueError("complementary modulus must be > 0")
    return math.pi / (2.0 * _agm(1.0, k_prime))


def elliptic_k_complete(k: float) -> float:
    """K(k) = int_0^{pi/2} dtheta / sqrt(1 - k^2 sin^2 theta), by the AGM."""
    if math.isnan(k):
        raise ValueError("k must not be NaN")
    if not (0.0 <= k < 1.0):
        raise ValueError("k must lie in [0, 1)")
    return _k_from_complement(math.sqrt((1.0 - k) * (1.0 + k)))


def _modulus_angle(L: float) -> float:
    # k = sin(t), k' = cos(t); K(k')/K(k) decreases in t
    target = 2.0 / L
    lo, hi = 0.0, math.pi / 2
    # 2^-100 is far below one ulp of t
    for _ in range(100):
        t = (lo + hi) / 2.0
        ratio = _k_from_complement(math.sin(t)) / _k_from_complement(math.cos(t))
        if ratio > target:
            lo = t
        else:
            hi = t
    return (lo + hi) / 2.0


def modulus_for_aspect(L: float) -> ConformalImages:
    """Elliptic modulus for which the sn map sends R_L onto the upper half-plane."""
    if not (L > 0 and math.isfinite(L)):
        raise ValueError("L must be positive and finite")
    t = _modulus_angle(float(L))
    k, k_prime = math.sin(t), math.cos(t)
    return ConformalImages(k=k, k_prime=k_prime, ya=-1.0 / k, yb=-1.0, yc=1.0, yd=1.0 / k)


def cross_ratio(ya: float, yb: float, yc: float, yd: float) -> float:
    if not (ya < yb < yc < yd):
        raise ValueError("points must satisfy ya < yb < yc < yd")
    return (yb - ya) * (yd - yc) / ((yc - ya) * (yd - yb))


def crossing_limit(L: float) -> float:
    """Limit of the discrete alternating crossing probability at lambda_0."""
    if not (L > 0 and math.isfinite(L)):
        raise ValueError("L must be positive and finite")
    t = _modulus_angle(float(L))
    # ((1 - k) / (1 + k))^2 with 1 - sin t written without cancellation
    one_minus_k = 2.0 * math.sin(math.pi / 4 - t / 2) ** 2
    return (one_minus_k / (1.0 + math.sin(t))) ** 2


def half_plane_force_points(images: ConformalImages) -> Tuple[float, float]:
    """(y^L, y^R) after the Mobius map sending b to 0 and d to infinity."""

    def mobius(y: float) -> float:
        return (y - images.yb) / (images.yd - y)

    return mobius(images.ya), mobius(images.yc)


def sle_hitting_probability(yL: float, yR: float) -> float:
    if not (yL < 0 < yR):
        raise ValueError("force points must satisfy yL < 0 < yR")
    return -yL / (yR - yL)


def diffusion_start(yL: float, yR: float) -> float:
    if not (yL < 0 < yR):
        raise ValueError("force points must satisfy yL < 0 < yR")
    return (-yL - yR) / (yR - yL)


# ----------------------------
# Time-changed SLE_4(-2; -2) driving process
# ----------------------------


def _q(x: np.ndarray) -> np.ndarray:
    return np.sqrt(2.0 * np.clip(1.0 - x * x, 0.0, None))


@dataclass(slots=True, frozen=True, eq=False)
class DiffusionPath:
    x0: float
    dt: float
    values: np.ndarray
    absorbed_at: Optional[int]
    absorption_step: Optional[int]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)


def _absorb(x: np.ndarray, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    x = np.clip(x, -1.0, 1.0)
    hit = np.abs(x) >= 1.0 - eps
    x = np.where(hit, np.sign(x), x)
    return x, hit


def _check_diffusion_args(x0: float, dt: float) -> None:
    if not (-1.0 < x0 < 1.0):
        raise ValueError("x0 must lie in (-1, 1)")
    if not (0.0 < dt <= settings.MAX_SLE_DT):
        raise ValueError(f"dt must lie in (0, {settings.MAX_SLE_DT}]")


def simulate_sle_diffusion(
    x0: float,
    dt: float,
    rng_seed=None,
    eps: float = settings.ABSORPTION_EPS,
    max_steps: int = 10_000_000,
) -> DiffusionPath:
    """Euler-Maruyama for dW = q(W) dB, clamped to [-1, 1] and absorbed near +-1."""
    _check_diffusion_args(x0, dt)
    rng = np.random.default_rng(rng_seed)
    sqrt_dt = math.sqrt(dt)

    edge = 1.0 - eps
    x = float(x0)
    hit = abs(x) >= edge
    if hit:
        x = math.copysign(1.0, x)
    values = [x]
    step = 0
    while not hit and step < max_steps:
        # draw in blocks; only the prefix up to absorption is kept
        for xi in rng.standard_normal(4096).tolist():
            x += math.sqrt(2.0 * max(1.0 - x * x, 0.0)) * sqrt_dt * xi
            x = min(1.0, max(-1.0, x))
            hit = abs(x) >= edge
            if hit:
                x = math.copysign(1.0, x)
            step += 1
            values.append(x)
            if hit or step >= max_steps:
                break

    return DiffusionPath(
        x0=float(x0),
        dt=float(dt),
        values=np.asarray(values),
        absorbed_at=int(x) if hit else None,
        absorption_step=step if hit else None,
    )


@dataclass(slots=True, frozen=True)
class HittingSample:
    plus: int
    minus: int
    unabsorbed: int

    @property
    def n(self) -> int:
        return self.plus + self.minus + self.unabsorbed


def sle_hitting_batch(
    x0: float,
    dt: float,
    n: int,
    rng_seed=None,
    eps: float = settings.ABSORPTION_EPS,
    max_steps: int = 10_000_000,
) -> HittingSample:
    """Same scheme as simulate_sle_diffusion, vectorized over n independent paths."""
    _check_diffusion_args(x0, dt)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    sqrt_dt = math.sqrt(dt)

    x, hit = _absorb(np.full(n, float(x0)), eps)
    final = np.where(hit, x, 0.0)
    alive = np.flatnonzero(~hit)
    x = x[alive]
    step = 0
    while alive.size and step < max_steps:
        x, hit = _absorb(x + _q(x) * sqrt_dt * rng.standard_normal(alive.size), eps)
        final[alive[hit]] = x[hit]
        alive, x = alive[~hit], x[~hit]
        step += 1

    return HittingSample(
        plus=int(np.count_nonzero(final > 0)),
        minus=int(np.count_nonzero(final < 0)),
        unabsorbed=int(alive.size),
    )


# ----------------------------
# Coordinate change back to the Loewner driving process
# ----------------------------


@dataclass(slots=True, frozen=True, eq=False)
class CoordinateChangedPath:
    t: np.ndarray
    Y: np.ndarray
    VL: np.ndarray
    VR: np.ndarray

    def recovered(self) -> np.ndarray:
        """(2Y - V^L - V^R) / (V^R - V^L), which should reproduce the input path."""
        return (2.0 * self.Y - self.VL - self.VR) / (self.VR - self.VL)


def coordinate_change_path(path: DiffusionPath) -> CoordinateChangedPath:
    y = np.asarray(path.values, dtype=float)
    if y.size == 0:
        raise ValueError("path is empty")
    s = path.dt * np.arange(y.size)
    grow = np.exp(s)
    y0 = float(y[0])

    def integral(integrand: np.ndarray) -> np.ndarray:
        if y.size == 1:
            return np.zeros(1)
        return cumulative_trapezoid(integrand, s, initial=0.0)

    t = integral(np.exp(2.0 * s) * (1.0 - y * y)) / 8.0
    Y = 0.5 * grow * y + 0.5 * integral(grow * y) - 0.5 * y0
    VL = -0.5 * (1.0 + y0) - 0.5 * integral(grow * (1.0 - y))
    VR = 0.5 * (1.0 - y0) + 0.5 * integral(grow * (1.0 + y))
    return CoordinateChangedPath(t=t, Y=Y, VL=VL, VR=VR)


# ----------------------------
# Brownian motion against a line
# ----------------------------


def bm_line_hitting_cdf(m: float, b: float, T: float) -> float:
    """P(tau <= T) for tau = inf{t : B_t <= m t - b}."""
    if not (b > 0 and T > 0):
        raise ValueError("b and T must be > 0")
    root = math.sqrt(T)
    first = float(ndtr(-(b / root - m * root)))
    # e^{2bm} * tail, combined in log space so large 2bm cannot overflow
    second = math.exp(2.0 * b * m + float(log_ndtr(-(b / root + m * root))))
    return min(1.0, first + second)
