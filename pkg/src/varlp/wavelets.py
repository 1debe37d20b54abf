"""Compactly supported Daubechies wavelet systems and the inhomogeneous
expansion from a base level J.

The scaling function phi and wavelet psi live on [0, 2N-1] and are produced
by cascade iteration of the two-scale relation

    phi(x) = sqrt(2) * sum_k h_k phi(2x - k)

starting from the box function, on a fixed dyadic lattice of step 2**-r_c.
The lattice is closed under x -> 2x - k, so the iteration is exact at lattice
points and converges there for every valid filter.  The highpass is the
alternating flip g_k = (-1)**k h_{2N-1-k}, which keeps supp psi = [0, 2N-1].

Dilated translates follow F_{j,k}(x) = 2**(j/2) F(2**j x - k).  Expansion
coefficients are computed by explicit grid quadrature against the sampled
atoms (the point of the machinery is fidelity to the continuous inner
products); the filter-bank recursion appears only as a cross-check in the
tests.

The dimension is fixed to one, so there is a single wavelet per level and no
orientation index anywhere in the data model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError, ResolutionError
from .grid import Grid, GridFunction

# Minimal-phase Daubechies lowpass filters, orthonormal normalization
# (sum h = sqrt(2), sum h^2 = 1).  N=1 is Haar, kept for tests although it is
# not C^1; N=2 is written in closed form; N=3,4 use the published values.
_SQRT2 = np.sqrt(2.0)
_SQRT3 = np.sqrt(3.0)
_DB_LOWPASS = {
    1: np.array([1.0, 1.0]) / _SQRT2,
    2: np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3]) / (4.0 * _SQRT2),
    3: np.array(
        [
            0.3326705529500826160,
            0.8068915093110925765,
            0.4598775021184915701,
            -0.1350110200102545887,
            -0.0854412738820266617,
            0.0352262918857095366,
        ]
    ),
    4: np.array(
        [
            0.2303778133088965009,
            0.7148465705529156471,
            0.6308807679298589079,
            -0.0279837694168598542,
            -0.1870348117190930841,
            0.0308413818355607636,
            0.0328830116668851997,
            -0.0105974017850690321,
        ]
    ),
}

CASCADE_TOL = 1e-10
CASCADE_MAX_ITER = 60


@dataclass(frozen=True)
class WaveletSystem:
    """Daubechies filter pair plus cascade samples of phi and psi.

    phi_samples[i] and psi_samples[i] hold the values at i * 2**-cascade_resolution,
    i = 0 .. (2N-1)*2**r_c, spanning the common support [0, 2N-1].
    """

    N: int
    cascade_resolution: int
    lowpass: np.ndarray
    highpass: np.ndarray
    phi_samples: np.ndarray
    psi_samples: np.ndarray

    @property
    def support_length(self) -> int:
        return 2 * self.N - 1

    @property
    def is_c1(self) -> bool:
        return self.N >= 3

    def evaluate(self, kind: str, u: np.ndarray) -> np.ndarray:
        """phi or psi at arbitrary points, by linear interpolation between
        cascade lattice values; exact on the lattice, zero off-support."""
        table = self.phi_samples if kind == "phi" else self.psi_samples
        u = np.asarray(u, dtype=float)
        pos = u * (1 << self.cascade_resolution)
        out = np.interp(pos, np.arange(table.size, dtype=float), table, left=0.0, right=0.0)
        return np.where((u >= 0.0) & (u <= self.support_length), out, 0.0)


def _cascade(lowpass: np.ndarray, r_c: int) -> np.ndarray:
    """Iterate the two-scale relation on the fixed lattice of step 2**-r_c,
    starting from the box on [0, 1), until sup-norm stationarity."""
    taps = lowpass.size
    scale = 1 << r_c
    size = (taps - 1) * scale + 1
    phi = np.zeros(size)
    phi[: scale] = 1.0  # box function chi_[0,1)
    idx = np.arange(size)
    for _ in range(CASCADE_MAX_ITER):
        new = np.zeros(size)
        for k, hk in enumerate(lowpass):
            src = 2 * idx - k * scale
            valid = (src >= 0) & (src < size)
            new[valid] += _SQRT2 * hk * phi[src[valid]]
        diff = float(np.max(np.abs(new - phi)))
        phi = new
        if diff < CASCADE_TOL:
            break
    return phi


def build_daubechies(N: int, r_c: int = 12) -> WaveletSystem:
    """Wavelet system for support parameter N (supp phi = [0, 2N-1]).

    N in {1, 2, 3, 4}; N = 1 is Haar (allowed for tests, not C^1).  The
    filter identities and the cascade normalizations are verified on exit.
    """
    if N not in _DB_LOWPASS:
        raise ConfigurationError(f"N must be one of {sorted(_DB_LOWPASS)}, got {N}")
    if r_c < 8:
        raise ConfigurationError(f"cascade resolution must be >= 8, got {r_c}")
    h = _DB_LOWPASS[N].copy()
    if abs(np.sum(h) - _SQRT2) > 1e-12 or abs(np.sum(h * h) - 1.0) > 1e-12:
        raise RuntimeError("internal error: filter normalization identities violated")
    g = ((-1.0) ** np.arange(h.size)) * h[::-1]
    phi = _cascade(h, r_c)
    scale = 1 << r_c
    size = phi.size
    idx = np.arange(size)
    psi = np.zeros(size)
    for k, gk in enumerate(g):
        src = 2 * idx - k * scale
        valid = (src >= 0) & (src < size)
        psi[valid] += _SQRT2 * gk * phi[src[valid]]
    step = 2.0 ** (-r_c)
    if abs(step * np.sum(phi) - 1.0) > 1e-4:
        raise RuntimeError("internal error: cascade did not normalize integral(phi) = 1")
    for name, table in (("phi", phi), ("psi", psi)):
        l2 = np.sqrt(step * np.sum(table * table))
        if abs(l2 - 1.0) > 1e-4:
            raise RuntimeError(f"internal error: ||{name}||_2 = {l2}, expected 1")
    phi.flags.writeable = False
    psi.flags.writeable = False
    return WaveletSystem(
        N=N, cascade_resolution=r_c, lowpass=h, highpass=g, phi_samples=phi, psi_samples=psi
    )


def _atom_window(system: WaveletSystem, j: int, k: int, grid: Grid) -> tuple[int, int]:
    """Cell range [start, stop) where F_{j,k} can be nonzero."""
    left = (k) * 2.0 ** (-j)
    right = (k + system.support_length) * 2.0 ** (-j)
    start = max(0, int(np.floor((left + grid.half_width) / grid.h)))
    stop = min(grid.count, int(np.ceil((right + grid.half_width) / grid.h)))
    return start, max(start, stop)


def _atom_values(system: WaveletSystem, kind: str, j: int, k: int, grid: Grid) -> tuple[int, np.ndarray]:
    start, stop = _atom_window(system, j, k, grid)
    x = grid.midpoints[start:stop]
    u = np.ldexp(x, j) - k  # 2**j * x - k
    return start, (2.0 ** (j / 2.0)) * system.evaluate(kind, u)


def dilate_translate(system: WaveletSystem, kind: str, j: int, k: int, grid: Grid) -> GridFunction:
    """Samples of 2**(j/2) F(2**j x - k) on the grid, F = phi or psi.

    Requires the cascade lattice to resolve the grid: r_c >= r - j, so every
    evaluation lands on (or between adjacent) cascade lattice points.
    """
    if kind not in ("phi", "psi"):
        raise ConfigurationError(f"kind must be 'phi' or 'psi', got {kind!r}")
    if system.cascade_resolution < grid.resolution - j:
        raise ResolutionError(
            f"cascade resolution {system.cascade_resolution} too coarse for level {j} "
            f"on a resolution-{grid.resolution} grid"
        )
    if 2.0 ** (-j) * system.support_length > 4 * grid.half_width:
        raise ConfigurationError(f"level {j} atoms are far wider than the domain")
    out = np.zeros(grid.count)
    start, vals = _atom_values(system, kind, j, k, grid)
    out[start : start + vals.size] = vals
    return GridFunction(grid, out)


def translate_range(system: WaveletSystem, j: int, grid: Grid) -> range:
    """Indices k whose atom support [2**-j k, 2**-j (k+2N-1)] meets (-L, L)."""
    L = grid.half_width
    k_min = int(np.ceil(-L * 2.0 ** j - system.support_length + 1e-9))
    k_max = int(np.floor(L * 2.0 ** j - 1e-9))
    return range(k_min, k_max + 1)


@dataclass
class WaveletCoefficients:
    """Inhomogeneous expansion data: a[k] = <f, phi_{J,k}> and
    d[(j, k)] = <f, psi_{j,k}> for J <= j <= j_max."""

    J: int
    j_max: int
    a: dict[int, float] = field(default_factory=dict)
    d: dict[tuple[int, int], float] = field(default_factory=dict)
    margin_ok: bool = True

    def energy(self) -> float:
        return float(
            sum(v * v for v in self.a.values()) + sum(v * v for v in self.d.values())
        )

    def to_json(self) -> str:
        doc = {
            "J": self.J,
            "j_max": self.j_max,
            "a": [[k, v] for k, v in sorted(self.a.items())],
            "d": [[j, k, v] for (j, k), v in sorted(self.d.items())],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "WaveletCoefficients":
        doc = json.loads(text)
        return cls(
            J=int(doc["J"]),
            j_max=int(doc["j_max"]),
            a={int(k): float(v) for k, v in doc["a"]},
            d={(int(j), int(k)): float(v) for j, k, v in doc["d"]},
        )


@dataclass(frozen=True)
class SquareFunctions:
    """Pointwise l2 aggregates of the expansion: scaling part v, wavelet part
    w1, and the cube-indicator surrogate w2 (piecewise constant on the
    level-j_max dyadic cells)."""

    v: GridFunction
    w1: GridFunction
    w2: GridFunction


def _support_margin_ok(f: GridFunction, system: WaveletSystem, J: int) -> bool:
    """Whether f's numerical support keeps distance 2**-J*(2N-1) from the
    domain edge, so every base-level atom meeting supp f fits inside."""
    s = np.abs(f.samples)
    peak = s.max()
    if peak == 0.0:
        return True
    nz = np.nonzero(s > 1e-9 * peak)[0]
    x = f.grid.midpoints
    margin = 2.0 ** (-J) * system.support_length
    lo, hi = x[nz[0]], x[nz[-1]]
    return (lo - (-f.grid.half_width) >= margin) and (f.grid.half_width - hi >= margin)


def analyze(
    f: GridFunction,
    system: WaveletSystem,
    J: int,
    j_max: int,
    require_margin: bool = False,
) -> WaveletCoefficients:
    """Quadrature coefficients against every atom whose support meets the
    domain, for levels J (scaling) and J..j_max (wavelet).

    Preconditions: J <= j_max <= r - 2 (two cells per finest oscillation).
    The support-margin condition (f at distance 2**-J*(2N-1) from the domain
    edge) is recorded on the result as margin_ok; pass require_margin=True to
    turn a violation into a DomainError.  Interior-supported f has exact
    coefficients either way because truncated atoms are only ever integrated
    where f lives.
    """
    grid = f.grid
    if not (J <= j_max <= grid.resolution - 2):
        raise ResolutionError(
            f"need J <= j_max <= r-2, got J={J}, j_max={j_max}, r={grid.resolution}"
        )
    coeffs = WaveletCoefficients(J=J, j_max=j_max)
    coeffs.margin_ok = _support_margin_ok(f, system, J)
    if require_margin and not coeffs.margin_ok:
        raise DomainError(
            "support leakage: f is closer than 2**-J*(2N-1) to the domain edge"
        )
    h = grid.h
    fs = f.samples
    for k in translate_range(system, J, grid):
        start, vals = _atom_values(system, "phi", J, k, grid)
        coeffs.a[k] = h * float(np.dot(fs[start : start + vals.size], vals))
    for j in range(J, j_max + 1):
        for k in translate_range(system, j, grid):
            start, vals = _atom_values(system, "psi", j, k, grid)
            coeffs.d[(j, k)] = h * float(np.dot(fs[start : start + vals.size], vals))
    return coeffs


def synthesize(coeffs: WaveletCoefficients, system: WaveletSystem, grid: Grid) -> GridFunction:
    """sum_k a_k phi_{J,k} + sum_{j,k} d_{j,k} psi_{j,k} on the grid."""
    out = np.zeros(grid.count)
    for k, c in coeffs.a.items():
        if c == 0.0:
            continue
        start, vals = _atom_values(system, "phi", coeffs.J, k, grid)
        out[start : start + vals.size] += c * vals
    for (j, k), c in coeffs.d.items():
        if c == 0.0:
            continue
        start, vals = _atom_values(system, "psi", j, k, grid)
        out[start : start + vals.size] += c * vals
    return GridFunction(grid, out)


def square_functions(
    coeffs: WaveletCoefficients, system: WaveletSystem, grid: Grid
) -> SquareFunctions:
    """The three square functions of the expansion.

    v  = (sum_k |a_k phi_{J,k}|^2)^(1/2)
    w1 = (sum_{j,k} |d_{j,k} psi_{j,k}|^2)^(1/2)
    w2 = (sum_{j,k} |d_{j,k}|^2 2**j chi_{Q_{j,k}})^(1/2)
    """
    v2 = np.zeros(grid.count)
    w1_2 = np.zeros(grid.count)
    w2_2 = np.zeros(grid.count)
    for k, c in coeffs.a.items():
        if c == 0.0:
            continue
        start, vals = _atom_values(system, "phi", coeffs.J, k, grid)
        v2[start : start + vals.size] += (c * vals) ** 2
    cells_total = grid.count
    for (j, k), c in coeffs.d.items():
        if c == 0.0:
            continue
        start, vals = _atom_values(system, "psi", j, k, grid)
        w1_2[start : start + vals.size] += (c * vals) ** 2
        # chi_{j,k} = 2**(j/2) * indicator of Q_{j,k}, clipped to the domain
        lo = k * 2.0 ** (-j)
        hi = (k + 1) * 2.0 ** (-j)
        i0 = max(0, int(round((lo + grid.half_width) / grid.h)))
        i1 = min(cells_total, int(round((hi + grid.half_width) / grid.h)))
        if i1 > i0:
            w2_2[i0:i1] += c * c * 2.0 ** j
    return SquareFunctions(
        v=GridFunction(grid, np.sqrt(v2)),
        w1=GridFunction(grid, np.sqrt(w1_2)),
        w2=GridFunction(grid, np.sqrt(w2_2)),
    )


def gram_matrix(
    system: WaveletSystem, grid: Grid, J: int, j_max: int
) -> tuple[np.ndarray, list[tuple[str, int, int]]]:
    """Grid-quadrature Gram matrix of all atoms fully supported inside the
    domain, with their labels; orthonormality holds up to quadrature error."""
    labels: list[tuple[str, int, int]] = []
    rows = []
    L = grid.half_width
    for kind, levels in (("phi", [J]), ("psi", range(J, j_max + 1))):
        for j in levels:
            side = 2.0 ** (-j)
            for k in translate_range(system, j, grid):
                if k * side >= -L and (k + system.support_length) * side <= L:
                    labels.append((kind, j, k))
                    rows.append(dilate_translate(system, kind, j, k, grid).samples)
    A = np.array(rows)
    return grid.h * (A @ A.T), labels
