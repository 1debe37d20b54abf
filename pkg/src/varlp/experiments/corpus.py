"""Seeded function corpora.

Corpus items carry a grid-independent callable so the same function can be
resampled at a finer resolution for refinement-stability comparisons.  The
standard corpus mixes Gaussians, smooth bumps, single wavelet atoms, random
finite wavelet expansions, and indicators mollified at a fixed scale tied to
the base resolution (raw indicators are excluded from equivalence runs: their
energy above any finite top level contaminates the ratios).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ConfigurationError
from ..exponents import smoothstep
from ..grid import DyadicCube, Grid, GridFunction
from ..operators import sparse_family_exists
from ..wavelets import WaveletSystem


@dataclass(frozen=True)
class CorpusItem:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]

    def sample(self, grid: Grid) -> GridFunction:
        return GridFunction.from_callable(grid, self.fn)


def gaussian(a: float, b: float) -> CorpusItem:
    return CorpusItem(f"gauss:{a:g}:{b:g}", lambda x: np.exp(-a * (x - b) ** 2))


def bump(center: float, halfwidth: float, amplitude: float = 1.0) -> CorpusItem:
    def fn(x):
        t = (np.asarray(x, dtype=float) - center) / halfwidth
        out = np.zeros_like(t)
        m = np.abs(t) < 1.0
        out[m] = amplitude * np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
        return out

    return CorpusItem(f"bump:{center:g}:{halfwidth:g}:{amplitude:g}", fn)


def mollified_indicator(a: float, b: float, eps: float) -> CorpusItem:
    def fn(x):
        x = np.asarray(x, dtype=float)
        return smoothstep((x - a) / eps) * smoothstep((b - x) / eps)

    return CorpusItem(f"mollind:{a:g}:{b:g}:{eps:g}", fn)


def indicator_item(a: float, b: float) -> CorpusItem:
    return CorpusItem(
        f"chi:{a:g}:{b:g}", lambda x: ((np.asarray(x) > a) & (np.asarray(x) < b)).astype(float)
    )


def atom_item(system: WaveletSystem, kind: str, j: int, k: int) -> CorpusItem:
    def fn(x):
        u = np.ldexp(np.asarray(x, dtype=float), j) - k
        return 2.0 ** (j / 2.0) * system.evaluate(kind, u)

    return CorpusItem(f"atom:{kind}:{j}:{k}", fn)


def expansion_item(system: WaveletSystem, seed: int, J: int, span: float) -> CorpusItem:
    """Random finite wavelet expansion with seeded coefficients decaying in
    level, supported roughly within [-span, span]."""
    rng = np.random.default_rng(seed)
    terms = []
    for j in range(J, J + 3):
        width = system.support_length * 2.0 ** (-j)
        k_lo = int(np.ceil((-span) * 2.0 ** j))
        k_hi = int(np.floor(span * 2.0 ** j - system.support_length))
        if k_hi < k_lo:
            continue
        for k in rng.choice(np.arange(k_lo, k_hi + 1), size=min(3, k_hi - k_lo + 1), replace=False):
            terms.append((j, int(k), rng.normal(0.0, 2.0 ** (-(j - J)))))

    def fn(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for j, k, c in terms:
            out += c * 2.0 ** (j / 2.0) * system.evaluate("psi", np.ldexp(x, j) - k)
        return out

    return CorpusItem(f"expand:{seed}", fn)


def standard_corpus(
    system: WaveletSystem,
    seed: int,
    size: int,
    half_width: int,
    mollify_scale: float,
    include_indicators: bool = False,
) -> list[CorpusItem]:
    """Deterministic mixed corpus supported well inside [-L, L]."""
    rng = np.random.default_rng(seed)
    span = max(1.0, half_width - 2.0)
    items: list[CorpusItem] = []
    builders = ["gauss", "bump", "atom", "expand", "mollind"]
    if include_indicators:
        builders.append("chi")
    i = 0
    while len(items) < size:
        kind = builders[i % len(builders)]
        i += 1
        if kind == "gauss":
            items.append(gaussian(float(rng.uniform(0.5, 8.0)), float(rng.uniform(-span, span) * 0.5)))
        elif kind == "bump":
            c = float(rng.uniform(-span, span) * 0.6)
            hw = float(rng.uniform(0.2, 1.0))
            items.append(bump(c, hw, float(rng.uniform(0.5, 2.0))))
        elif kind == "atom":
            j = int(rng.integers(0, 3))
            width = system.support_length * 2.0 ** (-j)
            k_max = int(np.floor((span - width) * 2.0 ** j))
            k_min = int(np.ceil(-span * 2.0 ** j))
            k = int(rng.integers(k_min, max(k_min + 1, k_max + 1)))
            items.append(atom_item(system, "psi" if rng.random() < 0.7 else "phi", j, k))
        elif kind == "expand":
            items.append(expansion_item(system, int(rng.integers(0, 1 << 30)), 0, span))
        elif kind == "mollind":
            a = float(rng.uniform(-span, span - 0.5))
            b = a + float(rng.uniform(0.5, min(2.0, span - a)))
            items.append(mollified_indicator(a, b, mollify_scale))
        else:
            a = float(rng.uniform(-span, span - 1.0))
            items.append(indicator_item(a, a + 1.0))
    return items


def piecewise_smooth(seed: int) -> Callable[[np.ndarray], np.ndarray]:
    """One draw of the piecewise-smooth family on [0, 1]: a random trig
    series plus up to two jump discontinuities."""
    rng = np.random.default_rng(seed)
    amps = rng.normal(0.0, 1.0, size=8)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=8)
    n_jumps = int(rng.integers(0, 3))
    jumps = [
        (float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.2, 0.6) * rng.choice([-1.0, 1.0])))
        for _ in range(n_jumps)
    ]

    def fn(x):
        x = np.asarray(x, dtype=float)
        out = sum(
            a * np.sin((k + 1) * np.pi * x + ph) * (k + 1) ** -2.0
            for k, (a, ph) in enumerate(zip(amps, phases))
        )
        for pos, amp in jumps:
            out = out + amp * (x > pos)
        return out

    return fn


def sparse_corpus(grid: Grid, root: DyadicCube, seed: int, count: int) -> list[GridFunction]:
    """Seeded piecewise-smooth functions for which a coefficient-one sparse
    family exists over the root cube (checked with the exact feasibility
    oracle; infeasible draws are skipped, which the seed makes deterministic)."""
    out = []
    draw = 0
    while len(out) < count:
        if draw > 40 * count:
            raise ConfigurationError("sparse corpus generator exhausted its draw budget")
        g = GridFunction.from_callable(grid, piecewise_smooth(seed * 100003 + draw))
        draw += 1
        if sparse_family_exists(g, root):
            out.append(g)
    return out


def parse_function(descriptor: str, system: Optional[WaveletSystem] = None) -> CorpusItem:
    """Function catalog for the CLI: gauss:a:b, bump:c:hw[:amp], chi:a:b,
    mollind:a:b:eps, atom:phi|psi:j:k, expand:seed."""
    parts = descriptor.split(":")
    try:
        if parts[0] == "gauss":
            return gaussian(float(parts[1]), float(parts[2]))
        if parts[0] == "bump":
            amp = float(parts[3]) if len(parts) > 3 else 1.0
            return bump(float(parts[1]), float(parts[2]), amp)
        if parts[0] == "chi":
            return indicator_item(float(parts[1]), float(parts[2]))
        if parts[0] == "mollind":
            return mollified_indicator(float(parts[1]), float(parts[2]), float(parts[3]))
        if parts[0] == "atom":
            if system is None:
                raise ConfigurationError("atom functions need a wavelet system")
            return atom_item(system, parts[1], int(parts[2]), int(parts[3]))
        if parts[0] == "expand":
            if system is None:
                raise ConfigurationError("expansion functions need a wavelet system")
            return expansion_item(system, int(parts[1]), 0, 2.0)
    except (IndexError, ValueError) as exc:
        raise ConfigurationError(f"bad function descriptor {descriptor!r}: {exc}") from exc
    raise ConfigurationError(f"unknown function descriptor {descriptor!r}")
