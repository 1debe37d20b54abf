"""Uniform dyadic grids on [-L, L] and midpoint-rule quadrature.

Conventions.
    The domain is the symmetric interval [-L, L] with L a positive integer.
    It is split into 2*L*2**r cells of width h = 2**-r and every function is
    represented by its values at the cell *midpoints*.  Midpoint sampling is
    deliberate: the indicator of any dyadic interval [2**-j*k, 2**-j*(k+1)]
    with j <= r is represented exactly (no sample sits on a cell boundary),
    and medians / rearrangements never face boundary ties.

    Functions are implicitly extended by zero outside [-L, L].  All
    quadrature is the plain midpoint rule h * sum(samples), which is exact
    for cell-aligned step functions and O(h^2) for smooth integrands.

    A dyadic cube (interval, in dimension one) of level j and index k is
    Q_{j,k} = [2**-j*k, 2**-j*(k+1)]; its side length is 2**-j and in
    dimension one its volume equals its side.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ResolutionError

# Memory guard: resolutions above 16 or more than ~2^26 cells are rejected.
MAX_RESOLUTION = 16
MAX_CELLS = 1 << 26


@dataclass(frozen=True)
class Grid:
    """Uniform grid of 2*L*2**r midpoint samples covering [-L, L]."""

    half_width: int
    resolution: int

    def __post_init__(self):
        L, r = self.half_width, self.resolution
        if not (isinstance(L, (int, np.integer)) and L >= 1):
            raise ConfigurationError(f"half_width must be a positive integer, got {L!r}")
        if not (isinstance(r, (int, np.integer)) and 1 <= r <= MAX_RESOLUTION):
            raise ConfigurationError(
                f"resolution must be an integer in [1, {MAX_RESOLUTION}], got {r!r}"
            )
        if 2 * L * (1 << r) > MAX_CELLS:
            raise ConfigurationError(
                f"grid would need {2 * L * (1 << r)} cells (limit {MAX_CELLS})"
            )

    @property
    def h(self) -> float:
        return 2.0 ** (-self.resolution)

    @property
    def count(self) -> int:
        return 2 * self.half_width * (1 << self.resolution)

    @cached_property
    def midpoints(self) -> np.ndarray:
        x = -self.half_width + (np.arange(self.count) + 0.5) * self.h
        x.flags.writeable = False
        return x

    def index_of(self, x: float) -> int:
        """Cell index containing the point x (clipped to the domain)."""
        i = int(np.floor((x + self.half_width) / self.h))
        return min(max(i, 0), self.count - 1)

    def cell_slice(self, a: float, b: float) -> slice:
        """Cells covering the grid-aligned interval [a, b); endpoints must
        land on cell boundaries to within float tolerance."""
        lo = (a + self.half_width) / self.h
        hi = (b + self.half_width) / self.h
        ilo, ihi = round(lo), round(hi)
        if abs(lo - ilo) > 1e-9 or abs(hi - ihi) > 1e-9:
            raise ResolutionError(f"interval [{a}, {b}] is not aligned to the grid")
        if ilo < 0 or ihi > self.count or ilo >= ihi:
            raise ConfigurationError(f"interval [{a}, {b}] is not inside the domain")
        return slice(ilo, ihi)


def make_grid(L: int, r: int) -> Grid:
    """Grid with half-width L, step 2**-r, samples at cell midpoints."""
    return Grid(int(L), int(r))


@dataclass(frozen=True)
class GridFunction:
    """Real-valued function sampled at the midpoints of a grid."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.count,):
            raise ConfigurationError(
                f"expected {self.grid.count} samples, got shape {s.shape}"
            )
        if not np.all(np.isfinite(s)):
            raise ConfigurationError("samples must all be finite")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.midpoints), dtype=float))

    def with_samples(self, samples: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, samples)


def indicator(grid: Grid, a: float, b: float) -> GridFunction:
    """Indicator of [a, b) sampled on the grid (exact when aligned)."""
    x = grid.midpoints
    return GridFunction(grid, ((x > a) & (x < b)).astype(float))


def integrate(f: GridFunction) -> float:
    """Midpoint-rule integral h * sum(samples)."""
    return f.grid.h * float(np.sum(f.samples))


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic interval Q_{j,k} = [2**-j*k, 2**-j*(k+1)]."""

    j: int
    k: int

    @property
    def side(self) -> float:
        return 2.0 ** (-self.j)

    @property
    def left(self) -> float:
        return self.side * self.k

    @property
    def right(self) -> float:
        return self.side * (self.k + 1)

    @property
    def center(self) -> float:
        return self.side * (self.k + 0.5)

    @property
    def volume(self) -> float:
        return self.side

    def children(self) -> tuple["DyadicCube", "DyadicCube"]:
        return DyadicCube(self.j + 1, 2 * self.k), DyadicCube(self.j + 1, 2 * self.k + 1)

    def contains(self, x: float) -> bool:
        return self.left <= x <= self.right

    def cell_slice(self, grid: Grid) -> slice:
        """Cells of the cube; requires j <= r and the cube inside the domain."""
        if self.j > grid.resolution:
            raise ResolutionError(
                f"cube level {self.j} finer than grid resolution {grid.resolution}"
            )
        # 2**(r-j) cells, starting at an exact integer offset.
        n = 1 << (grid.resolution - self.j)
        start = self.k * n + grid.half_width * (1 << grid.resolution)
        if start < 0 or start + n > grid.count:
            raise ConfigurationError(f"cube Q_({self.j},{self.k}) is not inside the domain")
        return slice(start, start + n)


def dyadic_cubes(j: int, grid: Grid) -> list[DyadicCube]:
    """All level-j dyadic cubes contained in [-L, L], in index order.

    For j >= 0 (and for negative j whose side divides L) the returned cubes
    tile the domain exactly.
    """
    L = grid.half_width
    if j > grid.resolution:
        raise ResolutionError(
            f"level {j} is finer than the grid resolution {grid.resolution}"
        )
    if 2.0 ** (-j) > 2 * L:
        raise ConfigurationError(f"cubes of side {2.0 ** (-j)} exceed the domain width {2 * L}")
    side = 2.0 ** (-j)
    k_min = int(np.ceil(-L / side - 1e-9))
    k_max = int(np.floor(L / side + 1e-9)) - 1
    return [DyadicCube(j, k) for k in range(k_min, k_max + 1)]
