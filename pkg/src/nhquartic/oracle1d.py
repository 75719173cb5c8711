"""High-precision levels of the 1D quartic oscillator ``-1/2 d2/dx2 + alpha x**4``.

This is a shooting method, deliberately unlike the matrix methods used for
the 2D problem.  The even (odd) solution regular at the origin is summed as
an entire power series,

    psi(x) = sum_k c_k x**k,   (k+2)(k+1) c_{k+2} = 2 alpha c_{k-4} - 2 E c_k,

in extended precision, and the energy is the root of ``psi(X; E)`` for a
wall ``X`` far in the classically forbidden region.  The wall error decays
like ``exp(-2 * sqrt(2 alpha) X**3 / 3)``; the series loses roughly the
logarithm of the growing solution's size to cancellation, so the working
precision is raised to match.

A level is certified when two refinements (a wider wall and more working
digits) agree to the requested number of significant digits.
"""

from dataclasses import dataclass
import math
import re

import mpmath as mp

from .errors import InvalidArgumentError, NeedMoreLevelsError, PrecisionNotReachedError
from .symmetry import basis_irrep

__all__ = ["Level1D", "quartic_levels", "SeparableLevel", "compose_separable"]

MAX_DIGITS = 18


@dataclass(frozen=True)
class Level1D:
    n: int
    alpha: float
    energy: mp.mpf
    digits: int

    @property
    def parity(self):
        return 1 if self.n % 2 == 0 else -1


def _as_mpf(alpha):
    """Coefficient as an exact high-precision number.

    Accepts numbers, ``mpmath.mpf`` and strings such as ``"1.5"`` or
    ``"sqrt(2)"``; strings avoid rounding the coefficient to a double.
    """
    if isinstance(alpha, str):
        text = alpha.strip().replace(" ", "")
        match = re.fullmatch(r"sqrt\(([0-9.eE+-]+)\)", text)
        with mp.workdps(60):
            value = mp.sqrt(mp.mpf(match.group(1))) if match else mp.mpf(text)
    elif isinstance(alpha, (int, float, mp.mpf)) and not isinstance(alpha, bool):
        value = mp.mpf(alpha)
    else:
        raise InvalidArgumentError(f"alpha must be a real number, got {alpha!r}")
    if not (mp.isfinite(value) and value > 0):
        raise InvalidArgumentError(f"alpha must be positive and finite, got {alpha!r}")
    return value


def _wall(alpha, energy, digits):
    """Wall position leaving a truncation error far below ``10**-digits``."""
    turning = (energy / alpha) ** 0.25
    barrier = 3.0 * (digits + 12) * math.log(10.0) / (2.0 * math.sqrt(2.0 * alpha))
    return (turning ** 3 + barrier) ** (1.0 / 3.0)


def _working_dps(alpha, wall, digits):
    growth = math.sqrt(2.0 * alpha) * wall ** 3 / 3.0 / math.log(10.0)
    return int(digits + 15 + 1.5 * growth)


def _shoot(energy, alpha, wall, parity):
    """``psi(wall)`` of the regular solution with the given parity (mp context set)."""
    c = [mp.mpf(1), mp.mpf(0)] if parity == 1 else [mp.mpf(0), mp.mpf(1)]
    total = c[0] + c[1] * wall
    power = wall
    eps = mp.eps
    quiet = 0
    k = 0
    while True:
        prev4 = c[k - 4] if k >= 4 else 0
        c.append((2 * alpha * prev4 - 2 * energy * c[k]) / ((k + 2) * (k + 1)))
        power *= wall
        term = c[k + 2] * power
        total += term
        k += 1
        # the recurrence couples six consecutive coefficients; stop after a run of tiny terms
        if k > 8 and abs(term) <= eps * abs(total):
            quiet += 1
            if quiet >= 6:
                return total
        else:
            quiet = 0


def _roots(alpha, parity, count, wall, dps, guesses=None):
    """First ``count`` roots in E of ``psi(wall; E)`` for one parity."""
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        x = mp.mpf(wall)
        f = lambda e: _shoot(e, a, x, parity)  # noqa: E731
        if guesses is None:
            brackets = []
            step = mp.mpf("0.2") * a ** (mp.mpf(1) / 3)
            lo, flo = mp.mpf(0), f(mp.mpf(0))
            while len(brackets) < count:
                hi = lo + step
                fhi = f(hi)
                if flo * fhi < 0:
                    brackets.append((lo, hi))
                lo, flo = hi, fhi
        else:
            brackets = guesses
        out = []
        tol = mp.mpf(10) ** (-(dps - 8))
        for lo, hi in brackets:
            out.append(mp.findroot(f, (mp.mpf(lo), mp.mpf(hi)), solver="anderson", tol=tol))
        return out


def quartic_levels(alpha, count, target_digits=MAX_DIGITS):
    """The lowest ``count`` levels of ``-1/2 d2/dx2 + alpha x**4``.

    Each energy is certified to ``target_digits`` significant digits by
    agreement of two independent refinements; the more refined value is
    returned as an ``mpmath.mpf``.
    """
    alpha_mp = _as_mpf(alpha)
    alpha = float(alpha_mp)
    if not isinstance(count, int) or count < 1:
        raise InvalidArgumentError(f"count must be a positive integer, got {count!r}")
    if not isinstance(target_digits, int) or not 1 <= target_digits <= MAX_DIGITS:
        raise InvalidArgumentError(f"target_digits must be in 1..{MAX_DIGITS}, got {target_digits!r}")

    # energies grow like n**(4/3); a crude bound fixes the wall for the top level
    e_top = 1.4 * alpha ** (1.0 / 3.0) * (count + 0.5) ** (4.0 / 3.0) + 1.0
    wall_a = _wall(alpha, e_top, target_digits)
    wall_b = 1.15 * wall_a
    dps_a = _working_dps(alpha, wall_a, target_digits)
    dps_b = _working_dps(alpha, wall_b, target_digits) + 10

    levels = []
    for parity in (1, -1):
        n_par = (count + (parity == 1)) // 2
        if n_par == 0:
            continue
        first = _roots(alpha_mp, parity, n_par, wall_a, dps_a)
        # second refinement starts from tight brackets around the first values
        spread = [mp.mpf(10) ** (-target_digits + 3) * max(1, abs(e)) for e in first]
        guesses = [(e - s, e + s) for e, s in zip(first, spread)]
        second = _roots(alpha_mp, parity, n_par, wall_b, dps_b, guesses)
        for j, (ea, eb) in enumerate(zip(first, second)):
            n = 2 * j + (parity == -1)
            with mp.workdps(dps_b):
                rel = abs(ea - eb) / abs(eb)
                achieved = int(mp.floor(-mp.log10(rel))) if rel > 0 else dps_a
            if achieved < target_digits:
                raise PrecisionNotReachedError(
                    f"level n={n} at alpha={alpha} certified to {achieved} digits only",
                    achieved,
                )
            levels.append(Level1D(n, alpha, eb, target_digits))
    levels.sort(key=lambda lv: lv.n)
    for lower, upper in zip(levels, levels[1:]):
        if not lower.energy < upper.energy:
            raise PrecisionNotReachedError("levels are not strictly increasing", 0)
    return levels


@dataclass(frozen=True)
class SeparableLevel:
    nx: int
    ny: int
    energy: mp.mpf
    ci: str
    d2h: str


def compose_separable(x_levels, y_levels, count):
    """The ``count`` smallest sums ``E_x[n_x] + E_y[n_y]`` with irrep labels.

    Raises NeedMoreLevelsError when a sum involving a level beyond the
    supplied ones could still fall among the ``count`` smallest.
    """
    if count < 1:
        raise InvalidArgumentError("count must be positive")
    with mp.workdps(2 * MAX_DIGITS + 10):
        sums = sorted(
            (lx.energy + ly.energy, lx.n, ly.n) for lx in x_levels for ly in y_levels
        )
    if len(sums) < count:
        raise NeedMoreLevelsError(f"only {len(sums)} sums available, {count} requested")
    # any missing sum exceeds E_x[last] + E_y[0] or E_x[0] + E_y[last]
    with mp.workdps(2 * MAX_DIGITS + 10):
        bound = min(
            x_levels[-1].energy + y_levels[0].energy, x_levels[0].energy + y_levels[-1].energy
        )
    if sums[count - 1][0] > bound:
        raise NeedMoreLevelsError(
            f"the {count} smallest sums are not all determined by "
            f"{len(x_levels)} x and {len(y_levels)} y levels"
        )
    return [
        SeparableLevel(nx, ny, e, basis_irrep((nx, ny), "Ci"), basis_irrep((nx, ny), "D2h"))
        for e, nx, ny in sums[:count]
    ]
