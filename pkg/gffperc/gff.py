from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.fft import dstn

from . import settings
from .exceptions import InvariantViolation
from .lattice import ARC_CODES, ArcSelector, LatticeRect, build_lattice

logger = logging.getLogger(__name__)

# ----------------------------
# Boundary conditions
# ----------------------------


class BCKind(Enum):
    ZERO = "zero"
    ALTERNATING = "alternating"
    PLUS_ZERO = "plus_zero"


@dataclass(slots=True, frozen=True)
class BoundaryCondition:
    kind: BCKind
    lam: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.kind, BCKind):
            raise TypeError("kind must be a BCKind")
        if self.kind is BCKind.ZERO:
            if self.lam != 0.0:
                raise ValueError("zero boundary condition takes no lambda")
        elif not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError("lambda must be > 0")

    @classmethod
    def zero(cls) -> "BoundaryCondition":
        return cls(BCKind.ZERO)

    @classmethod
    def alternating(cls, lam: float) -> "BoundaryCondition":
        return cls(BCKind.ALTERNATING, float(lam))

    @classmethod
    def plus_zero(cls, lam: float) -> "BoundaryCondition":
        return cls(BCKind.PLUS_ZERO, float(lam))

    @classmethod
    def parse(cls, name: str, lam: Optional[float] = None) -> "BoundaryCondition":
        try:
            kind = BCKind(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown boundary condition {name!r}") from None
        if kind is BCKind.ZERO:
            return cls.zero()
        if lam is None:
            raise ValueError(f"boundary condition {name!r} needs lambda")
        return cls(kind, float(lam))

    def __str__(self) -> str:
        if self.kind is BCKind.ZERO:
            return "zero"
        return f"{self.kind.value}({self.lam:g})"


def boundary_values(lat: LatticeRect, bc: BoundaryCondition) -> np.ndarray:
    """Full-length vertex vector: boundary data on the frame, 0 inside."""
    values = np.zeros(lat.n_vertices)
    if bc.kind is BCKind.ZERO:
        return values
    label = lat.arc_label
    plus = (label == ARC_CODES[ArcSelector.LEFT]) | (label == ARC_CODES[ArcSelector.RIGHT])
    minus = (label == ARC_CODES[ArcSelector.BOTTOM]) | (label == ARC_CODES[ArcSelector.TOP])
    values[plus] = bc.lam
    values[minus] = -bc.lam if bc.kind is BCKind.ALTERNATING else 0.0
    return values


# ----------------------------
# Field / GreenMatrix
# ----------------------------


@dataclass(slots=True, frozen=True, eq=False)
class Field:
    values: np.ndarray
    bc: BoundaryCondition

    def grid(self, lat: LatticeRect) -> np.ndarray:
        """Values as an (ny, nx) array, row jy, column ix."""
        return self.values.reshape(lat.ny, lat.nx)

    def interior(self, lat: LatticeRect) -> np.ndarray:
        return self.grid(lat)[1:-1, 1:-1]


@dataclass(slots=True, frozen=True, eq=False)
class GreenMatrix:
    matrix: np.ndarray
    nx: int
    ny: int
    slot: np.ndarray  # vertex id -> row of matrix, -1 on the boundary

    def matches(self, lat: LatticeRect) -> bool:
        return (self.nx, self.ny) == (lat.nx, lat.ny)

    def vertex_green(self, u: int, v: int) -> float:
        i, j = self.slot[u], self.slot[v]
        if i < 0 or j < 0:
            return 0.0
        return float(self.matrix[i, j])


# ----------------------------
# Spectral machinery
# ----------------------------


def _sine_basis(m: int) -> np.ndarray:
    """Orthonormal, symmetric DST-I matrix of size m."""
    k = np.arange(1, m + 1)
    return math.sqrt(2.0 / (m + 1)) * np.sin(np.pi * np.outer(k, k) / (m + 1))


def generator_eigenvalues(rows: int, cols: int) -> np.ndarray:
    """Eigenvalues of the rate-1 walk generator on a rows x cols block."""
    kj = np.cos(np.pi * np.arange(1, cols + 1) / (cols + 1))
    kk = np.cos(np.pi * np.arange(1, rows + 1) / (rows + 1))
    return 1.0 - (kk[:, None] + kj[None, :]) / 2.0


def sine_transform(coeffs: np.ndarray, method: str = "auto") -> np.ndarray:
    """Two-dimensional orthonormal DST-I (its own inverse)."""
    rows, cols = coeffs.shape
    if method == "auto":
        method = "naive" if rows * cols < settings.NAIVE_SINE_LIMIT else "fast"
    if method == "naive":
        return _sine_basis(rows) @ coeffs @ _sine_basis(cols)
    if method == "fast":
        return dstn(coeffs, type=1, norm="ortho")
    raise ValueError(f"unknown sine transform method {method!r}")


def _interior_laplacian(lat: LatticeRect) -> sp.csr_matrix:
    rows, cols = lat.interior_shape

    def second_difference(m: int) -> sp.spmatrix:
        return sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1])

    return (
        sp.kron(sp.identity(rows), second_difference(cols))
        + sp.kron(second_difference(rows), sp.identity(cols))
    ).tocsr()


def _require_interior(lat: LatticeRect) -> Tuple[int, int]:
    rows, cols = lat.interior_shape
    if rows == 0 or cols == 0:
        raise ValueError("lattice has no interior vertices")
    return rows, cols


# ----------------------------
# Operations
# ----------------------------


def dirichlet_green_dense(lat: LatticeRect) -> GreenMatrix:
    rows, cols = _require_interior(lat)
    n = rows * cols
    if n > settings.DENSE_GREEN_LIMIT:
        raise ValueError(
            f"{n} interior vertices exceed the dense limit {settings.DENSE_GREEN_LIMIT}"
        )
    laplacian = _interior_laplacian(lat).toarray()
    matrix = scipy.linalg.solve(laplacian, 4.0 * np.eye(n), assume_a="pos")
    matrix = (matrix + matrix.T) / 2.0

    slot = np.full(lat.n_vertices, -1, dtype=np.int64)
    slot[lat.interior_ids] = np.arange(n)
    return GreenMatrix(matrix=matrix, nx=lat.nx, ny=lat.ny, slot=slot)


def sample_zero_boundary(lat: LatticeRect, rng_seed=None, method: str = "auto") -> Field:
    rng = np.random.default_rng(rng_seed)
    values = np.zeros(lat.n_vertices)
    rows, cols = lat.interior_shape
    if rows and cols:
        xi = rng.standard_normal((rows, cols))
        interior = sine_transform(xi / np.sqrt(generator_eigenvalues(rows, cols)), method)
        if np.any(interior == 0.0):
            raise InvariantViolation("sampled interior value is exactly zero")
        values.reshape(lat.ny, lat.nx)[1:-1, 1:-1] = interior
    return Field(values=values, bc=BoundaryCondition.zero())


def _neighbour_sum(grid: np.ndarray) -> np.ndarray:
    return grid[1:-1, :-2] + grid[1:-1, 2:] + grid[:-2, 1:-1] + grid[2:, 1:-1]


def harmonic_extension(
    lat: LatticeRect,
    boundary_values: np.ndarray,
    bc: Optional[BoundaryCondition] = None,
) -> Field:
    """Discrete-harmonic interpolation of the frame data in `boundary_values`.

    `boundary_values` is a full-length vertex vector; interior entries are ignored.
    """
    data = np.asarray(boundary_values, dtype=float)
    if data.shape != (lat.n_vertices,):
        raise ValueError("boundary_values must have one entry per vertex")
    boundary = lat.boundary_mask
    if not np.all(np.isfinite(data[boundary])):
        raise ValueError("boundary values must be finite")

    values = np.where(boundary, data, 0.0)
    grid = values.reshape(lat.ny, lat.nx)
    rows, cols = lat.interior_shape
    if rows and cols:
        scale = 4.0 * generator_eigenvalues(rows, cols)
        tol = settings.HARMONIC_RESIDUAL_TOL * max(1.0, float(np.max(np.abs(data[boundary]))))
        for _ in range(4):
            # residual of "value = average of the 4 neighbours"
            residual = (_neighbour_sum(grid) - 4.0 * grid[1:-1, 1:-1]) / 4.0
            if np.max(np.abs(residual)) < tol:
                break
            grid[1:-1, 1:-1] += sine_transform(sine_transform(4.0 * residual) / scale)
        else:
            raise InvariantViolation("harmonic extension did not reach residual tolerance")
    tag = bc if bc is not None else BoundaryCondition.zero()
    return Field(values=values, bc=tag)


def sample_with_boundary(lat: LatticeRect, bc: BoundaryCondition, rng_seed=None) -> Field:
    if not isinstance(bc, BoundaryCondition):
        raise TypeError("bc must be a BoundaryCondition")
    noise = sample_zero_boundary(lat, rng_seed)
    if bc.kind is BCKind.ZERO:
        return noise
    mean = harmonic_extension(lat, boundary_values(lat, bc), bc)
    values = mean.values + noise.values
    if np.any(values[lat.interior_ids] == 0.0):
        raise InvariantViolation("sampled interior value is exactly zero")
    return Field(values=values, bc=bc)


# ----------------------------
# Green diagonal diagnostic
# ----------------------------


def green_diagonal(lat: LatticeRect, ids: Iterable[int]) -> np.ndarray:
    """G(v, v) for interior vertices, from the sine expansion."""
    rows, cols = _require_interior(lat)
    basis_rows = _sine_basis(rows) ** 2
    basis_cols = _sine_basis(cols) ** 2
    inverse = 1.0 / generator_eigenvalues(rows, cols)
    out: List[float] = []
    for vid in ids:
        ix, jy = lat.grid_position(int(vid))
        if lat.boundary_mask[vid]:
            out.append(0.0)
            continue
        out.append(float(basis_rows[jy - 1] @ inverse @ basis_cols[ix - 1]))
    return np.asarray(out)


@dataclass(slots=True, frozen=True)
class GreenGrowthFit:
    slope: float
    intercept: float
    distances: Tuple[float, ...]
    diagonal: Tuple[float, ...]


def green_diagonal_slope(sizes: Sequence[int] = (17, 33, 65, 129)) -> GreenGrowthFit:
    """Fit G(center, center) against log(distance to the boundary) on square grids.

    `sizes` are interior side lengths (odd, so that the center is a vertex).
    """
    if len(sizes) < 2:
        raise ValueError("need at least two grid sizes")
    distances, diagonal = [], []
    for m in sizes:
        if m < 1 or m % 2 == 0:
            raise ValueError("grid sizes must be odd and positive")
        lat = build_lattice(1.0, 1.0 / (m + 3))
        center = lat.vertex_id((m + 1) // 2, (m + 1) // 2)
        distances.append((m + 1) / 2)
        diagonal.append(float(green_diagonal(lat, [center])[0]))
    slope, intercept = np.polyfit(np.log(distances), diagonal, 1)
    logger.debug("green diagonal fit: slope=%.4f intercept=%.4f", slope, intercept)
    return GreenGrowthFit(
        slope=float(slope),
        intercept=float(intercept),
        distances=tuple(distances),
        diagonal=tuple(diagonal),
    )
