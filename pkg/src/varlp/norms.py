"""Modular, Luxemburg norm, and the duality pairing.

The modular of f is integral(|f|**p(x) * w(x) dx) on the grid.  The Luxemburg
norm is the unique lam > 0 with modular(f/lam) = 1 (uniqueness holds because
p_+ < inf makes lam -> modular(f/lam) strictly decreasing for f != 0).  We
solve by bracketed bisection rather than Newton: the modular's derivative is
stiff when p varies, and robustness beats speed at desk scale.

The weighted norm is always computed directly from (f, p, w); the rescaling
of f by w**(1/p) is used only as a cross-check in the tests, never as the
computation path, to avoid compounding pointwise power errors.
"""

from __future__ import annotations

import numpy as np

from .errors import RangeError
from .exponents import VariableExponent, Weight
from .grid import GridFunction

LUXEMBURG_TOL = 1e-10
MAX_BRACKET_STEPS = 200


def _modular_samples(samples: np.ndarray, p: VariableExponent, w: Weight) -> float:
    with np.errstate(over="ignore"):
        total = p.grid.h * float(np.sum(np.abs(samples) ** p.samples * w.samples))
    return total


def modular(f: GridFunction, p: VariableExponent, w: Weight) -> float:
    """integral(|f|**p(x) w(x) dx); nonnegative, zero iff f = 0 on the grid."""
    _check_shared_grid(f, p, w)
    value = _modular_samples(f.samples, p, w)
    if not np.isfinite(value):
        raise RangeError("modular overflowed (large |f| with large p_+)")
    return value


def pairing(f: GridFunction, g: GridFunction) -> float:
    """L2 inner product integral(f*g dx) (real-valued, no conjugation)."""
    if f.grid != g.grid:
        raise ValueError("pairing requires a shared grid")
    return f.grid.h * float(np.sum(f.samples * g.samples))


def luxemburg_norm(f: GridFunction, p: VariableExponent, w: Weight) -> float:
    """inf{lam > 0 : modular(f/lam) <= 1}, by bracketed bisection.

    The bracket is grown/shrunk geometrically from lam = 1; overflowed
    modulars compare as > 1, which the monotone bracket logic tolerates.
    Absolute tolerance LUXEMBURG_TOL on lam.
    """
    _check_shared_grid(f, p, w)
    if not np.any(f.samples):
        return 0.0
    fs = f.samples

    def mod_at(lam: float) -> float:
        return _modular_samples(fs / lam, p, w)

    lo = hi = 1.0
    if mod_at(1.0) > 1.0:
        for _ in range(MAX_BRACKET_STEPS):
            hi *= 2.0
            if mod_at(hi) <= 1.0:
                break
        else:
            raise RangeError("Luxemburg bracket failed to close after 200 doublings")
        lo = hi / 2.0
    else:
        for _ in range(MAX_BRACKET_STEPS):
            lo /= 2.0
            if mod_at(lo) > 1.0:
                break
        else:
            return 0.0  # modular(f/lam) <= 1 down to lam ~ 1e-60: f is negligible
        hi = lo * 2.0
    while hi - lo > LUXEMBURG_TOL:
        mid = 0.5 * (lo + hi)
        if mod_at(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_shared_grid(f: GridFunction, p: VariableExponent, w: Weight):
    if f.grid != p.grid or f.grid != w.grid:
        raise ValueError("function, exponent, and weight must share one grid")
