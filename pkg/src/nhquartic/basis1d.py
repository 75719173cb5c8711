"""Harmonic-oscillator basis matrix elements in one dimension.

The basis functions are the eigenfunctions of ``p**2 + q**2`` evaluated at a
scaled coordinate, ``phi_n(beta * x) * sqrt(beta)``.  With ``q = beta * x``
the position and kinetic operators follow from the ladder representation
``q = (a + a^dagger) / sqrt(2)``:

    x**k        = beta**(-k) * q**k
    -1/2 d2/dx2 = beta**2 / 2 * p**2

All matrix elements are evaluated from closed-form ladder expansions, so the
top rows of a truncated matrix carry the exact elements of the infinite
operator rather than the corner errors of products of truncated matrices.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .errors import InvalidArgumentError

__all__ = [
    "Basis1D",
    "default_scale",
    "tuned_scale",
    "position_power_matrix",
    "kinetic_matrix",
]


@dataclass(frozen=True)
class Basis1D:
    """First ``size`` oscillator functions at length scale ``scale``."""

    size: int
    scale: float = 1.0

    def __post_init__(self):
        if not isinstance(self.size, (int, np.integer)) or self.size < 1:
            raise InvalidArgumentError(f"basis size must be a positive integer, got {self.size!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidArgumentError(f"basis scale must be positive and finite, got {self.scale!r}")

    @property
    def parity(self):
        """Parity ``(-1)**n`` of each basis function."""
        return np.where(np.arange(self.size) % 2 == 0, 1, -1)


def default_scale(alpha):
    """Length scale ``(4*alpha)**(1/6)`` suited to ``p**2/2 + alpha*x**4``."""
    if not alpha > 0:
        raise InvalidArgumentError(f"quartic coefficient must be positive, got {alpha!r}")
    return (4.0 * alpha) ** (1.0 / 6.0)


def _q_power_bands(n, power):
    """Bands ``{offset: values}`` of <m+offset| q**power |m> for m = 0..n-1-offset."""
    m = np.arange(n, dtype=float)

    def head(offset):
        return m[: max(n - offset, 0)]

    def rising(offset):
        # sqrt((m+1)(m+2)...(m+offset)) for the first n-offset rows
        out = np.ones(max(n - offset, 0))
        for j in range(1, offset + 1):
            out *= head(offset) + j
        return np.sqrt(out)

    bands = {}
    if power == 1:
        bands[1] = rising(1) / math.sqrt(2.0)
    elif power == 2:
        bands[0] = (2.0 * m + 1.0) / 2.0
        bands[2] = rising(2) / 2.0
    elif power == 3:
        r = head(1) + 1.0
        bands[1] = 3.0 * r * np.sqrt(r) / (2.0 * math.sqrt(2.0))
        bands[3] = rising(3) / (2.0 * math.sqrt(2.0))
    elif power == 4:
        bands[0] = (6.0 * m * m + 6.0 * m + 3.0) / 4.0
        bands[2] = (4.0 * head(2) + 6.0) * rising(2) / 4.0
        bands[4] = rising(4) / 4.0
    # offsets >= n have empty bands; drop them
    return {k: v for k, v in bands.items() if k < n}


def _from_bands(n, bands):
    out = np.zeros((n, n))
    for offset, values in bands.items():
        if offset == 0:
            out[np.arange(n), np.arange(n)] = values
        else:
            idx = np.arange(n - offset)
            out[idx + offset, idx] = values
            out[idx, idx + offset] = values
    return out


def position_power_matrix(basis, power):
    """Matrix of ``x**power`` (``power`` in 1..4) in ``basis``.

    Exactly symmetric, banded with bandwidth ``power``, and zero wherever
    ``m + n + power`` is odd.
    """
    if isinstance(power, bool) or power not in (1, 2, 3, 4):
        raise InvalidArgumentError(f"power must be one of 1, 2, 3, 4; got {power!r}")
    factor = basis.scale ** (-power)
    bands = {k: factor * v for k, v in _q_power_bands(basis.size, power).items()}
    return _from_bands(basis.size, bands)


def kinetic_matrix(basis):
    """Matrix of ``-1/2 d2/dx2`` in ``basis``."""
    n = basis.size
    m = np.arange(n, dtype=float)
    factor = 0.5 * basis.scale ** 2
    bands = {0: factor * (2.0 * m + 1.0) / 2.0}
    if n > 2:
        bands[2] = -factor * np.sqrt((m[: n - 2] + 1.0) * (m[: n - 2] + 2.0)) / 2.0
    return _from_bands(n, bands)


def tuned_scale(alpha, size, levels=None):
    """Scale minimising the sum of the lowest ``levels`` variational levels.

    Every variational level bounds the exact one from above, so the sum is
    a reference-free figure of merit.  The search runs over
    ``[default/2, 4*default]``; ``levels`` defaults to ``size // 2``.
    """
    base = default_scale(alpha)
    if not isinstance(size, (int, np.integer)) or size < 2:
        raise InvalidArgumentError(f"size must be an integer >= 2, got {size!r}")
    m = max(1, size // 2) if levels is None else int(levels)
    if not 1 <= m <= size:
        raise InvalidArgumentError(f"levels must lie in 1..{size}, got {levels!r}")

    def trace(log_scale):
        b = Basis1D(size, math.exp(log_scale))
        h = kinetic_matrix(b) + alpha * position_power_matrix(b, 4)
        return scipy.linalg.eigvalsh(h, subset_by_index=(0, m - 1)).sum()

    lo, hi = math.log(0.5 * base), math.log(4.0 * base)
    res = minimize_scalar(trace, bounds=(lo, hi), method="bounded", options={"xatol": 1e-4})
    return math.exp(res.x)
