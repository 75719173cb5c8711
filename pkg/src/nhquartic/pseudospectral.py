"""Sinc-DVR discretization on a uniform symmetric grid.

Each axis carries ``N`` interior points of ``[-L, L]`` with spacing
``h = 2L/(N+1)``.  The nodes are built as ``h * (i - (N-1)/2)`` so that the
grid is reflection symmetric bit for bit and the discretized ``H0`` commutes
exactly with the grid reflections.

For solving, each axis is rotated to the reflection-adapted basis of even
and odd node combinations.  In that basis every operator has the same
parity structure as in the oscillator basis, so the assembly, symmetry
blocks and real similarity transform of :mod:`nhquartic.hamiltonian2d`
apply unchanged.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import hamiltonian2d
from .errors import InvalidArgumentError, MethodDisagreementError, ResourceLimitError
from .hamiltonian2d import AxisOperators, Operation, ipow

__all__ = [
    "Grid2D",
    "second_derivative_matrix",
    "build_h_grid",
    "reflection_permutation",
    "adapted_axis",
    "CrossValidationReport",
    "cross_validate",
]


@dataclass(frozen=True)
class Grid2D:
    """Square grid of ``points_per_axis**2`` interior nodes on ``[-L, L]**2``."""

    half_width: float = 6.0
    points_per_axis: int = 40

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise InvalidArgumentError(f"half_width must be positive, got {self.half_width!r}")
        if not isinstance(self.points_per_axis, (int, np.integer)) or self.points_per_axis < 3:
            raise InvalidArgumentError(
                f"points_per_axis must be an integer >= 3, got {self.points_per_axis!r}"
            )

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.points_per_axis + 1)

    @property
    def nodes(self):
        n = self.points_per_axis
        return self.spacing * (np.arange(n) - (n - 1) / 2.0)


def second_derivative_matrix(grid):
    """Sinc-DVR matrix of ``d2/dx2`` on the nodes of one axis."""
    n = grid.points_per_axis
    d = np.subtract.outer(np.arange(n), np.arange(n))
    off = np.where(d == 0, 1, d).astype(float)
    sign = np.where(d % 2 == 0, 1.0, -1.0)
    out = -2.0 * sign / off ** 2
    out[np.diag_indices(n)] = -math.pi ** 2 / 3.0
    return out / grid.spacing ** 2


def build_h_grid(params, grid, max_dim=None):
    """Complex-symmetric grid matrix of ``H0 + i*lam*W`` (x index fastest)."""
    n = grid.points_per_axis
    limit = hamiltonian2d.MAX_DIMENSION if max_dim is None else max_dim
    if n * n > limit:
        raise ResourceLimitError(f"grid dimension {n * n} exceeds the configured maximum {limit}")
    d2 = second_derivative_matrix(grid)
    eye = np.eye(n)
    kinetic = -0.5 * (np.kron(eye, d2) + np.kron(d2, eye))
    x = grid.nodes
    X, Y = np.meshgrid(x, x)  # X[j, i] = x_i, flattened with i fastest
    potential = params.alpha_x * ipow(X, 4) + params.alpha_y * ipow(Y, 4)
    w = params.perturbation(X, Y)
    h = kinetic.astype(complex)
    h[np.diag_indices(n * n)] += (potential + 1j * params.lam * w).ravel()
    return h


def reflection_permutation(grid, op):
    """Index permutation ``perm`` with ``(R f)[k] = f[perm[k]]`` for reflection ``op``."""
    n = grid.points_per_axis
    i = np.tile(np.arange(n), n)
    j = np.repeat(np.arange(n), n)
    op = Operation(op) if not isinstance(op, Operation) else op
    if op in (Operation.P, Operation.PX):
        i = n - 1 - i
    if op in (Operation.P, Operation.PY):
        j = n - 1 - j
    return i + n * j


def adapted_axis(grid):
    """Kinetic and ``x**k`` matrices in the reflection-adapted basis.

    Basis order: even combinations ``(e_i + e_{n-1-i})/sqrt(2)`` for
    ``i < n//2``, the centre node when ``n`` is odd, then the odd
    combinations in the same order.
    """
    n = grid.points_per_axis
    half = n // 2
    centre = half if n % 2 else None
    n_even = half + (centre is not None)
    x = grid.nodes
    k = -0.5 * second_derivative_matrix(grid)
    lo = np.arange(half)
    mirror = n - 1 - lo

    kin = np.zeros((n, n))
    kin[:half, :half] = k[np.ix_(lo, lo)] + k[np.ix_(lo, mirror)]
    kin[n_even:, n_even:] = k[np.ix_(lo, lo)] - k[np.ix_(lo, mirror)]
    if centre is not None:
        col = math.sqrt(2.0) * k[centre, lo]
        kin[half, :half] = col
        kin[:half, half] = col
        kin[half, half] = k[centre, centre]
    kin = 0.5 * (kin + kin.T)

    powers = {}
    even_idx = np.arange(half)
    odd_idx = n_even + np.arange(half)
    for p in (1, 2, 3, 4):
        m = np.zeros((n, n))
        xp = ipow(x[lo], p)
        if p % 2 == 0:
            m[even_idx, even_idx] = xp
            m[odd_idx, odd_idx] = xp
        else:
            m[even_idx, odd_idx] = xp
            m[odd_idx, even_idx] = xp
        powers[p] = m

    parity = np.concatenate([np.ones(n_even, dtype=int), -np.ones(half, dtype=int)])
    return AxisOperators(kin, powers, parity)


@dataclass
class CrossValidationReport:
    lam: float
    perturbation: str
    k: int
    tol: float
    basis_values: np.ndarray
    grid_values: np.ndarray
    distances: np.ndarray
    max_distance: float
    passed: bool


def cross_validate(params, dm_config, grid_config, k=8, tol=1e-8):
    """Compare the ``k`` lowest eigenvalues of the basis and grid methods.

    Values are sorted by real part, paired by optimal bipartite matching in
    the complex plane, and the report passes when the largest pair distance
    is at most ``tol``.  A pair farther apart than ``10 * tol`` raises
    MethodDisagreementError.
    """
    from scipy.optimize import linear_sum_assignment

    from .problem import Problem

    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidArgumentError(f"k must be a positive integer, got {k!r}")
    dm = Problem.build(params, dm_config).spectrum(params.lam, count=k, vectors=False)
    grid = Problem.build(params, grid_config).spectrum(params.lam, count=k, vectors=False)
    a = dm.eigenvalues[:k]
    b = grid.eigenvalues[:k]
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    distances = cost[rows, cols]
    worst = float(distances.max())
    report = CrossValidationReport(
        lam=params.lam,
        perturbation=params.perturbation.value,
        k=int(k),
        tol=tol,
        basis_values=a,
        grid_values=b[cols],
        distances=distances,
        max_distance=worst,
        passed=worst <= tol,
    )
    if worst > 10 * tol:
        err = MethodDisagreementError(
            f"basis and grid eigenvalues disagree by {worst:.3e} at lam={params.lam}"
        )
        err.report = report
        raise err
    return report
