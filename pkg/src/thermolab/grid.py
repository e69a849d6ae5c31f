"""Uniform truncated-line grid, central stencils and trapezoid norms.

Fields live on the ``n`` interior nodes of ``[-L, L]`` and are extended by
zero beyond the boundary for every stencil.  The fourth derivative is the
composition of two second-derivative stencils so that the discrete
capillarity operator is symmetric positive semidefinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

__all__ = [
    "Grid",
    "spatial_derivative",
    "flux_divergence",
    "face_average",
    "face_gradient",
    "quadrature_norm",
    "integrate",
    "second_difference_matrix",
    "fourth_difference_matrix",
]


@dataclass(frozen=True)
class Grid:
    L: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs n >= 16 interior points, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"half-width L must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / (self.n + 1)

    @cached_property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(1, self.n + 1)

    @cached_property
    def x_faces(self) -> np.ndarray:
        """Midpoints between consecutive nodes, boundary nodes included (n + 1 values)."""
        return -self.L + self.dx * (np.arange(self.n + 1) + 0.5)

    def refined(self) -> "Grid":
        """Grid with half the spacing whose even nodes coincide with this one's nodes."""
        return Grid(self.L, 2 * self.n + 1)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.n)


def _pad(f: np.ndarray, width: int) -> np.ndarray:
    return np.pad(np.asarray(f, dtype=float), width)


def spatial_derivative(f, k: int, grid: Grid) -> np.ndarray:
    """Second-order central derivative of order ``k`` in {1, 2, 3, 4}."""
    dx = grid.dx
    if k == 1:
        g = _pad(f, 1)
        return (g[2:] - g[:-2]) / (2.0 * dx)
    if k == 2:
        g = _pad(f, 1)
        return (g[2:] - 2.0 * g[1:-1] + g[:-2]) / dx**2
    if k == 3:
        g = _pad(f, 2)
        return (g[4:] - 2.0 * g[3:-1] + 2.0 * g[1:-3] - g[:-4]) / (2.0 * dx**3)
    if k == 4:
        return spatial_derivative(spatial_derivative(f, 2, grid), 2, grid)
    raise ValueError(f"derivative order must be 1, 2, 3 or 4, got {k}")


def face_gradient(f, grid: Grid) -> np.ndarray:
    """Compact difference ``(f[i+1] - f[i]) / dx`` on the n + 1 faces."""
    g = _pad(f, 1)
    return np.diff(g) / grid.dx


def face_average(f) -> np.ndarray:
    g = _pad(f, 1)
    return 0.5 * (g[1:] + g[:-1])


def flux_divergence(flux_faces: np.ndarray, grid: Grid) -> np.ndarray:
    """Nodal divergence of a face flux; the discrete adjoint of ``-face_gradient``."""
    return np.diff(flux_faces) / grid.dx


def integrate(values, grid: Grid) -> float:
    """Trapezoid rule with zero values at the two boundary nodes."""
    return float(grid.dx * np.sum(values))


def quadrature_norm(f, p, grid: Grid) -> float:
    f = np.asarray(f, dtype=float)
    if p == 1:
        return integrate(np.abs(f), grid)
    if p == 2:
        return math.sqrt(integrate(f * f, grid))
    if p in (math.inf, "inf", np.inf):
        return float(np.max(np.abs(f))) if f.size else 0.0
    raise ValueError(f"unsupported norm order {p!r}")


def second_difference_matrix(grid: Grid) -> sparse.csr_matrix:
    n, dx = grid.n, grid.dx
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    return sparse.diags([off, main, off], [-1, 0, 1], format="csr") / dx**2


def fourth_difference_matrix(grid: Grid) -> sparse.csr_matrix:
    d2 = second_difference_matrix(grid)
    return (d2 @ d2).tocsr()
