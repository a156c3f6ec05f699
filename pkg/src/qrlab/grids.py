"""Periodic spatial grids and grid functions.

Grids are uniform tensor lattices on [-L/2, L/2)^n with the trapezoid
(uniform-weight) quadrature rule; the dual frequency lattice is the integer
lattice scaled by 2*pi/L, laid out in numpy FFT order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid on [-L/2, L/2)^dim with N points per axis."""

    dim: int
    points_per_axis: int
    period: float = 2 * np.pi

    def __post_init__(self):
        if not 1 <= self.dim <= 3:
            raise DomainError(f"grid dimension {self.dim} outside 1..3")
        n = self.points_per_axis
        if n < 2 or n & (n - 1):
            raise DomainError(f"points_per_axis {n} must be a power of two")

    @property
    def spacing(self) -> float:
        return self.period / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis_points(self) -> np.ndarray:
        """Coordinates along one axis, -L/2 ... L/2 - dx."""
        n = self.points_per_axis
        return (np.arange(n) - n // 2) * self.spacing

    def axis_frequencies(self) -> np.ndarray:
        """Frequency lattice along one axis in FFT order, scaled by 2*pi/L."""
        n = self.points_per_axis
        return 2 * np.pi * np.fft.fftfreq(n, d=self.spacing)

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.axis_points()] * self.dim), indexing="ij")

    def frequency_meshgrid(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.axis_frequencies()] * self.dim), indexing="ij")

    def max_frequency(self) -> float:
        """Magnitude of the Nyquist frequency pi*N/L along one axis."""
        return np.pi * self.points_per_axis / self.period

    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim


@dataclass
class GridFunction:
    """Complex values on a periodic grid, tagged with the h they belong to."""

    grid: PeriodicGrid
    values: np.ndarray
    h: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape():
            raise DomainError(
                f"value shape {self.values.shape} does not match grid {self.grid.shape()}")
        if not self.h > 0:
            raise DomainError(f"h={self.h} must be positive")

    def norm(self, p: float = 2) -> float:
        """L^p norm by the grid quadrature rule; p = inf gives the max."""
        if p == np.inf:
            return float(np.max(np.abs(self.values)))
        w = self.grid.cell_volume
        return float((w * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))

    def normalized(self) -> "GridFunction":
        return GridFunction(self.grid, self.values / self.norm(2), self.h)

    def fft(self) -> np.ndarray:
        """Fourier coefficients u~(zeta) = sum_x u(x) exp(-i<x, zeta>).

        Includes the phase shift for the grid origin at -L/2, so the
        coefficient at lattice frequency zeta is the literal exponential sum
        over the physical coordinates.
        """
        n = self.grid.dim
        coeffs = np.fft.fftn(self.values)
        for axis in range(n):
            zeta = self.grid.axis_frequencies()
            phase = np.exp(1j * zeta * (self.grid.period / 2))
            shape = [1] * n
            shape[axis] = -1
            coeffs = coeffs * phase.reshape(shape)
        return coeffs

    def from_fft(self, coeffs: np.ndarray) -> "GridFunction":
        """Inverse of :meth:`fft`, producing a new GridFunction."""
        n = self.grid.dim
        for axis in range(n):
            zeta = self.grid.axis_frequencies()
            phase = np.exp(-1j * zeta * (self.grid.period / 2))
            shape = [1] * n
            shape[axis] = -1
            coeffs = coeffs * phase.reshape(shape)
        return GridFunction(self.grid, np.fft.ifftn(coeffs), self.h)
