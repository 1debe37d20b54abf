"""Variable exponents, weights, log-Hoelder diagnostics, and the local
Muckenhoupt constant.

An exponent is a grid-sampled function p with values in [1, inf); the class-P
requirement 1 < p_- <= p_+ < inf is enforced where an operation needs it.  A
weight is a grid-sampled strictly positive function w; its dual weight is
sigma = w**(-1/(p-1)), the weight of the conjugate-exponent space.

Catalog descriptors accepted by :func:`make_exponent` / :func:`make_weight`
(also used verbatim by the CLI):

    exponents:  "const:c"                 constant c
                "step:p1:p2:x0:delta"     C-infinity step p1 -> p2 centred at
                                          x0, transition width delta
    weights:    "one"                     w = 1
                "exp:alpha"               w = exp(alpha*|x|)
                "pow:A"                   w = (1+|x|)**A

Numbers, callables, and explicit sample tables are accepted as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, RangeError
from .grid import Grid, GridFunction


def smoothstep(t):
    """C-infinity monotone ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    out = a / (a + b)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class VariableExponent:
    """Grid-sampled exponent with cached essential bounds."""

    values: GridFunction
    p_minus: float
    p_plus: float
    p_infinity: Optional[float] = None

    @property
    def samples(self) -> np.ndarray:
        return self.values.samples

    @property
    def grid(self) -> Grid:
        return self.values.grid

    @property
    def is_constant(self) -> bool:
        return self.p_plus - self.p_minus < 1e-14

    def require_class_p(self):
        if not (1.0 < self.p_minus <= self.p_plus < np.inf):
            raise ConfigurationError(
                f"exponent must satisfy 1 < p_- <= p_+ < inf, got "
                f"p_-={self.p_minus}, p_+={self.p_plus}"
            )


@dataclass(frozen=True)
class Weight:
    """Grid-sampled strictly positive weight."""

    values: GridFunction

    def __post_init__(self):
        s = self.values.samples
        if not np.all(s > 0):
            raise ConfigurationError("weight samples must be strictly positive")

    @property
    def samples(self) -> np.ndarray:
        return self.values.samples

    @property
    def grid(self) -> Grid:
        return self.values.grid


@dataclass(frozen=True)
class LogHolderReport:
    """Estimated log-Hoelder constants (suprema over sampled pairs)."""

    c0: float
    c_inf: float
    p_infinity_used: float


def _exponent_callable(spec):
    if isinstance(spec, str):
        parts = spec.split(":")
        if parts[0] == "const" and len(parts) == 2:
            c = float(parts[1])
            return lambda x: np.full_like(np.asarray(x, dtype=float), c)
        if parts[0] == "step" and len(parts) == 5:
            p1, p2, x0, delta = map(float, parts[1:])
            if delta <= 0:
                raise ConfigurationError("step transition width must be positive")
            return lambda x: p1 + (p2 - p1) * smoothstep((np.asarray(x) - x0) / delta + 0.5)
        raise ConfigurationError(f"unknown exponent descriptor {spec!r}")
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    return None


def make_exponent(spec, grid: Grid, p_infinity: Optional[float] = None) -> VariableExponent:
    """Build an exponent from a descriptor, number, callable, or table.

    Rejects samples below 1 and non-finite samples.  p_infinity defaults to
    the sample at the right domain edge (our convention; pass it explicitly
    when the tail behaviour matters).
    """
    fn = _exponent_callable(spec)
    if fn is not None:
        vals = np.asarray(fn(grid.midpoints), dtype=float)
    elif callable(spec):
        vals = np.asarray(spec(grid.midpoints), dtype=float)
    else:
        vals = np.asarray(spec, dtype=float)
    if vals.shape != (grid.count,):
        raise ConfigurationError(
            f"exponent table has shape {vals.shape}, expected ({grid.count},)"
        )
    if not np.all(np.isfinite(vals)):
        raise ConfigurationError("exponent samples must be finite (p_+ = inf rejected)")
    if np.min(vals) < 1.0:
        raise ConfigurationError(f"exponent samples must be >= 1, min is {np.min(vals)}")
    gf = GridFunction(grid, vals)
    return VariableExponent(
        values=gf,
        p_minus=float(np.min(vals)),
        p_plus=float(np.max(vals)),
        p_infinity=p_infinity,
    )


def make_weight(spec, grid: Grid) -> Weight:
    """Build a weight from a catalog name, number, callable, or table."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if spec == "one":
            fn = lambda x: np.ones_like(np.asarray(x, dtype=float))
        elif parts[0] == "exp" and len(parts) == 2:
            alpha = float(parts[1])
            fn = lambda x: np.exp(alpha * np.abs(x))
        elif parts[0] == "pow" and len(parts) == 2:
            A = float(parts[1])
            fn = lambda x: (1.0 + np.abs(x)) ** A
        else:
            raise ConfigurationError(f"unknown weight descriptor {spec!r}")
        vals = fn(grid.midpoints)
    elif isinstance(spec, (int, float)):
        vals = np.full(grid.count, float(spec))
    elif callable(spec):
        vals = np.asarray(spec(grid.midpoints), dtype=float)
    else:
        vals = np.asarray(spec, dtype=float)
    return Weight(GridFunction(grid, vals))


def conjugate_exponent(p: VariableExponent) -> VariableExponent:
    """Pointwise conjugate p' = p/(p-1); requires p_- > 1."""
    if p.p_minus <= 1.0:
        raise ConfigurationError("conjugate exponent is unbounded when p_- = 1")
    vals = p.samples / (p.samples - 1.0)
    p_inf = None
    if p.p_infinity is not None:
        p_inf = p.p_infinity / (p.p_infinity - 1.0)
    return VariableExponent(
        values=GridFunction(p.grid, vals),
        p_minus=float(np.min(vals)),
        p_plus=float(np.max(vals)),
        p_infinity=p_inf,
    )


def dual_weight(p: VariableExponent, w: Weight) -> Weight:
    """Dual weight sigma = w**(-1/(p-1)).

    The involution dual(conjugate(p), dual(p, w)) == w holds pointwise.  An
    overflow or underflow out of the positive normal range is reported as a
    RangeError rather than silently flushed.
    """
    if p.p_minus <= 1.0:
        raise ConfigurationError("dual weight needs p_- > 1")
    with np.errstate(over="ignore", under="ignore"):
        sigma = w.samples ** (-1.0 / (p.samples - 1.0))
    if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
        raise RangeError("w**(-1/(p-1)) left the representable positive range")
    return Weight(GridFunction(p.grid, sigma))


def _default_p_infinity(p: VariableExponent) -> float:
    if p.p_infinity is not None:
        return float(p.p_infinity)
    return float(p.samples[-1])


def log_holder_constants(p: VariableExponent) -> LogHolderReport:
    """Scan-based estimates of the local and at-infinity log-Hoelder constants.

    c0   = sup over sampled pairs with 0 < |x-y| <= 1/2 of
           |p(x)-p(y)| * (-log|x-y|)
    cinf = sup over samples of |p(x) - p_inf| * log(e + |x|)

    Both are suprema over a finite pair set, hence lower bounds that grow
    monotonically under grid refinement; divergence under refinement is the
    diagnostic for a non-log-Hoelder exponent, not an error.
    """
    grid = p.grid
    if grid.h > 0.25:
        raise ConfigurationError("log-Hoelder scan needs grid spacing h <= 1/4")
    vals = p.samples
    max_lag = int(round(0.5 / grid.h))
    c0 = 0.0
    for lag in range(1, max_lag + 1):
        diff = np.max(np.abs(vals[lag:] - vals[:-lag])) if lag < len(vals) else 0.0
        c0 = max(c0, diff * (-np.log(lag * grid.h)))
    p_inf = _default_p_infinity(p)
    c_inf = float(np.max(np.abs(vals - p_inf) * np.log(np.e + np.abs(grid.midpoints))))
    return LogHolderReport(c0=float(c0), c_inf=c_inf, p_infinity_used=p_inf)


# ---------------------------------------------------------------------------
# Local Muckenhoupt constant over a finite family of grid-aligned intervals.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlignedInterval:
    """Grid-aligned interval given by a start cell and a cell count."""

    start: int
    length: int


def aligned_interval_family(
    grid: Grid,
    sides: Optional[Sequence[float]] = None,
    offset_stride: int = 1,
) -> list[AlignedInterval]:
    """Default cube family: every side 2**-m for m = 0..r, at every grid-cell
    offset (subsample offsets with offset_stride > 1 for speed).  All members
    have volume <= 1 as the local Muckenhoupt class requires."""
    if sides is None:
        sides = [2.0 ** (-m) for m in range(0, grid.resolution + 1)]
    family = []
    for side in sides:
        if side > 1.0 + 1e-12:
            raise ConfigurationError(f"cube of volume {side} > 1 not allowed in the local class")
        n = int(round(side / grid.h))
        if n < 1 or abs(n * grid.h - side) > 1e-12:
            raise ConfigurationError(f"side {side} is not grid-aligned")
        for start in range(0, grid.count - n + 1, offset_stride):
            family.append(AlignedInterval(start, n))
    return family


def _indicator_norms_batch(p_windows: np.ndarray, w_windows: np.ndarray, h: float) -> np.ndarray:
    """Luxemburg norms of cube indicators, one cube per row.

    Solves sum_i h*w_i*lam**(-p_i) = 1 per row.  Rows with constant exponent
    have the closed form lam = A**(1/p); the rest are bisected inside the
    bracket [min, max](A**(1/p_-), A**(1/p_+)), which always contains the
    root.  Matches norms.luxemburg_norm(indicator) to solver tolerance.
    """
    A = h * np.sum(w_windows, axis=1)
    pmin = np.min(p_windows, axis=1)
    pmax = np.max(p_windows, axis=1)
    lam = A ** (1.0 / pmax)
    varying = (pmax - pmin) > 1e-14
    if np.any(varying):
        Pv = p_windows[varying]
        Wv = w_windows[varying] * h
        lo = np.minimum(A[varying] ** (1.0 / pmin[varying]), A[varying] ** (1.0 / pmax[varying]))
        hi = np.maximum(A[varying] ** (1.0 / pmin[varying]), A[varying] ** (1.0 / pmax[varying]))
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            mod = np.sum(Wv * mid[:, None] ** (-Pv), axis=1)
            too_big = mod > 1.0  # modular decreasing in lam: root above mid
            lo = np.where(too_big, mid, lo)
            hi = np.where(too_big, hi, mid)
            if np.max(hi - lo) < 1e-12:
                break
        lam_v = 0.5 * (lo + hi)
        lam = lam.copy()
        lam[varying] = lam_v
    return lam


def a_loc_products(
    p: VariableExponent, w: Weight, family: Iterable[AlignedInterval]
) -> np.ndarray:
    """Per-cube products |Q|^-1 * ||chi_Q||_{p(.),w} * ||chi_Q||_{p'(.),sigma}."""
    pc = conjugate_exponent(p)
    sigma = dual_weight(p, w)
    grid = p.grid
    by_length: dict[int, list[int]] = {}
    order: list[tuple[int, int]] = []
    for idx, q in enumerate(family):
        by_length.setdefault(q.length, []).append(q.start)
        order.append((q.length, q.start))
    out = np.empty(len(order))
    results: dict[tuple[int, int], float] = {}
    for n, starts in by_length.items():
        starts_arr = np.asarray(starts)
        pw = np.lib.stride_tricks.sliding_window_view(p.samples, n)[starts_arr]
        pcw = np.lib.stride_tricks.sliding_window_view(pc.samples, n)[starts_arr]
        ww = np.lib.stride_tricks.sliding_window_view(w.samples, n)[starts_arr]
        sw = np.lib.stride_tricks.sliding_window_view(sigma.samples, n)[starts_arr]
        n1 = _indicator_norms_batch(pw, ww, grid.h)
        n2 = _indicator_norms_batch(pcw, sw, grid.h)
        vol = n * grid.h
        for s, v in zip(starts, n1 * n2 / vol):
            results[(n, s)] = float(v)
    for i, key in enumerate(order):
        out[i] = results[key]
    return out


def a_loc_constant(
    p: VariableExponent, w: Weight, family: Optional[Iterable[AlignedInterval]] = None
) -> float:
    """Lower bound for the local Muckenhoupt constant: the maximum of the
    defining product over the given cube family (default: all grid-aligned
    dyadic-side intervals of volume <= 1 at all offsets)."""
    p.require_class_p()
    if family is None:
        family = aligned_interval_family(p.grid)
    family = list(family)
    if not family:
        raise ConfigurationError("cube family is empty")
    return float(np.max(a_loc_products(p, w, family)))
