"""A model bound to one discretization, solved block by block.

:class:`Problem` holds the assembled ``H0`` and ``W`` of either the
oscillator-basis method or the sinc-grid method and returns spectra of
``H0 + i*lam*W`` in the full basis.  Two structural reductions keep the
dense solves small and exact:

* basis states are split into blocks of equal parity under the reflections
  that commute with ``H`` (all four of them at ``lam = 0``);
* inside each block, the reflection ``S`` with ``S W S = -W`` turns ``H``
  into a similar real matrix, so eigenvalues come out exactly real or as
  exact conjugate pairs.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import basis1d
from . import hamiltonian2d as h2d
from .eigensolver import Spectrum, eig_general, eig_symmetric, sort_order
from .errors import InvalidArgumentError, ResourceLimitError
from .pseudospectral import Grid2D, adapted_axis
from .symmetry import swap_permutation

__all__ = ["BasisIndex", "BasisConfig", "GridConfig", "Problem"]


class BasisIndex(NamedTuple):
    nx: int
    ny: int


@dataclass(frozen=True)
class BasisConfig:
    """Oscillator product basis; scales default to ``(4 alpha)**(1/6)``."""

    size: int = 40
    y_size: int = None
    scale_x: float = None
    scale_y: float = None
    scale_rule: str = "default"

    method = "basis_dm"

    def __post_init__(self):
        if self.scale_rule not in ("default", "tuned"):
            raise InvalidArgumentError(f"scale_rule must be 'default' or 'tuned', got {self.scale_rule!r}")

    def describe(self, params):
        basis = self.product_basis(params)
        return {
            "method": self.method,
            "basis_size_x": basis.x_basis.size,
            "basis_size_y": basis.y_basis.size,
            "basis_scale_x": basis.x_basis.scale,
            "basis_scale_y": basis.y_basis.scale,
        }

    def product_basis(self, params):
        """Product basis; with ``scale_rule="tuned"`` unset scales are optimised per axis."""
        sx, sy = self.scale_x, self.scale_y
        if self.scale_rule == "tuned":
            ny = self.size if self.y_size is None else self.y_size
            sx = basis1d.tuned_scale(params.alpha_x, self.size) if sx is None else sx
            sy = basis1d.tuned_scale(params.alpha_y, ny) if sy is None else sy
        return h2d.ProductBasis.for_model(params, self.size, self.y_size, sx, sy)

    def scaled(self, factor):
        """Same configuration with every axis size multiplied by ``factor``."""
        y = None if self.y_size is None else int(round(self.y_size * factor))
        return BasisConfig(
            int(round(self.size * factor)), y, self.scale_x, self.scale_y, self.scale_rule
        )


@dataclass(frozen=True)
class GridConfig:
    half_width: float = 5.0
    points: int = 40

    method = "pseudospectral"

    def grid(self):
        return Grid2D(self.half_width, self.points)

    def describe(self, params):
        grid = self.grid()
        return {
            "method": self.method,
            "grid_n": grid.points_per_axis,
            "grid_l": grid.half_width,
            "grid_spacing": grid.spacing,
        }

    def scaled(self, factor):
        return GridConfig(self.half_width, int(round(self.points * factor)))


@dataclass
class Problem:
    params: h2d.ModelParams
    x_ops: h2d.AxisOperators
    y_ops: h2d.AxisOperators
    meta: dict = field(default_factory=dict)
    max_dim: int = None

    def __post_init__(self):
        self.h0 = h2d.assemble_h0(
            self.x_ops, self.y_ops, self.params.alpha_x, self.params.alpha_y, self.max_dim
        )
        self.w = h2d.assemble_w(self.params.perturbation, self.x_ops, self.y_ops, self.max_dim)
        self._norm_h0 = float(np.linalg.norm(self.h0))
        self._norm_w = float(np.linalg.norm(self.w))
        self._axis_cache = None
        self._blocks = {}

    @classmethod
    def build(cls, params, config, max_dim=None):
        if isinstance(config, BasisConfig):
            basis = config.product_basis(params)
            x_ops = h2d.AxisOperators.from_basis(basis.x_basis)
            y_ops = h2d.AxisOperators.from_basis(basis.y_basis)
        elif isinstance(config, GridConfig):
            x_ops = y_ops = adapted_axis(config.grid())
        else:
            raise InvalidArgumentError(f"unknown discretization config {config!r}")
        dim = x_ops.size * y_ops.size
        limit = h2d.MAX_DIMENSION if max_dim is None else max_dim
        if dim > limit:
            raise ResourceLimitError(
                f"matrix dimension {dim} exceeds the configured maximum {limit}"
            )
        return cls(params, x_ops, y_ops, config.describe(params), max_dim)

    @property
    def method(self):
        return self.meta.get("method", "custom")

    @property
    def shape(self):
        return self.x_ops.size, self.y_ops.size

    @property
    def dim(self):
        return self.x_ops.size * self.y_ops.size

    @property
    def parity_x(self):
        return np.tile(self.x_ops.parity, self.y_ops.size)

    @property
    def parity_y(self):
        return np.repeat(self.y_ops.parity, self.x_ops.size)

    @property
    def swap_symmetric(self):
        """True when ``H0`` commutes with the coordinate swap ``x <-> y``."""
        return (
            self.params.alpha_x == self.params.alpha_y
            and self.x_ops.size == self.y_ops.size
            and np.array_equal(self.x_ops.kinetic, self.y_ops.kinetic)
            and np.array_equal(self.x_ops.powers[4], self.y_ops.powers[4])
        )

    def h(self, lam):
        return self.h0 + 1j * (lam * self.w)

    def norm(self, lam):
        """Frobenius norm of ``H(lam)``."""
        return float(np.hypot(self._norm_h0, lam * self._norm_w))

    def block_indices(self, lam):
        key = lam == 0
        if key not in self._blocks:
            if key:
                ops, mat = frozenset(h2d.Operation), self.h0
            else:
                ops = h2d.residual_unitary_symmetries(self.params.perturbation)
                mat = self.h0 + self.w
            self._blocks[key] = [b.indices for b in h2d.symmetry_blocks(mat, self, ops)]
        return self._blocks[key]

    def spectrum(self, lam, count=None, vectors=True):
        """Eigenpairs of ``H(lam)`` sorted by (Re, Im), eigenvectors in the full basis.

        With ``count`` the lowest ``count`` values are returned, plus one more
        when the cut would separate a conjugate pair.
        """
        lam = float(lam)
        if not (np.isfinite(lam) and lam >= 0):
            raise InvalidArgumentError(f"lam must be non-negative and finite, got {lam!r}")
        keep = None if count is None else count + 1
        reflection = h2d.conjugating_reflection(self.params.perturbation)
        signs = None if reflection is None else h2d.operation_signs(self, reflection)

        values, vecs, residuals = [], [], []
        for idx in self.block_indices(lam):
            h0 = self.h0[np.ix_(idx, idx)]
            if lam == 0:
                part = eig_symmetric(h0) if vectors else _eigvalsh(h0)
                part = part.lowest(keep) if keep else part
                block_vecs = part.eigenvectors
                if vectors and self.swap_symmetric:
                    block_vecs = self._swap_adapt(part.eigenvalues.real, block_vecs, idx)
            elif signs is not None:
                w = self.w[np.ix_(idx, idx)]
                real, d = h2d.real_similarity(h0, w, lam, signs[idx])
                part = eig_general(real, vectors=vectors, count=keep)
                block_vecs = None if part.eigenvectors is None else d[:, None] * part.eigenvectors
            else:
                w = self.w[np.ix_(idx, idx)]
                part = eig_general(h0 + 1j * lam * w, vectors=vectors, count=keep)
                block_vecs = part.eigenvectors
            values.append(part.eigenvalues)
            if vectors:
                full = np.zeros((self.dim, len(part.eigenvalues)), dtype=complex)
                full[idx, :] = block_vecs
                vecs.append(full)
                residuals.append(part.residuals * part.norm)

        values = np.concatenate(values)
        order = sort_order(values)
        if count is not None:
            n = min(count, len(order))
            if n < len(order) and _split_pair(values[order[n - 1]], values[order[n]]):
                n += 1
            order = order[:n]
        norm = self.norm(lam)
        if not vectors:
            return Spectrum(values[order], None, None, norm)
        vecs = np.concatenate(vecs, axis=1)[:, order]
        residuals = np.concatenate(residuals)[order] / norm
        return Spectrum(values[order], vecs, residuals, norm)

    def _swap_adapt(self, values, vecs, idx):
        """Rotate degenerate eigenvectors of one block onto swap eigenvectors.

        Only blocks mapped onto themselves by the swap are touched, so the
        parity labels of the block are kept.
        """
        perm = swap_permutation(self.shape)
        inside = np.zeros(self.dim, dtype=bool)
        inside[idx] = True
        if not np.array_equal(inside[perm], inside):
            return vecs
        where = np.full(self.dim, -1)
        where[idx] = np.arange(len(idx))
        local = where[perm[idx]]  # (S u)[k] = u[local[k]] within the block
        vecs = vecs.copy()
        start = 0
        while start < len(values):
            stop = start + 1
            while stop < len(values) and values[stop] - values[start] <= 1e-10 * max(1.0, abs(values[start])):
                stop += 1
            if stop - start > 1:
                u = vecs[:, start:stop]
                s = u.T @ u[local]
                _, rot = np.linalg.eigh(0.5 * (s + s.T))
                vecs[:, start:stop] = u @ rot
            start = stop
        return vecs

    def axis_states(self):
        """1D eigenpairs ``(E_x, U_x, E_y, U_y)`` of the separable ``H0`` factors."""
        if self._axis_cache is None:
            ex = eig_symmetric(self.x_ops.hamiltonian(self.params.alpha_x))
            ey = eig_symmetric(self.y_ops.hamiltonian(self.params.alpha_y))
            self._axis_cache = (
                ex.eigenvalues.real, ex.eigenvectors, ey.eigenvalues.real, ey.eigenvectors
            )
        return self._axis_cache

    def product_weights(self, vectors, candidates):
        """``|<n_x, n_y | v>|**2`` for 1D eigenstate products ``candidates``."""
        _, ux, _, uy = self.axis_states()
        nx_size, ny_size = self.shape
        vectors = np.asarray(vectors)
        out = np.empty((vectors.shape[1], len(candidates)))
        a = np.array([c[0] for c in candidates])
        b = np.array([c[1] for c in candidates])
        for col in range(vectors.shape[1]):
            m = vectors[:, col].reshape(ny_size, nx_size)
            coeff = uy.T @ m @ ux  # coeff[b, a]
            out[col] = np.abs(coeff[b, a]) ** 2
        return out

    def lowest_products(self, count):
        """The ``count`` lowest separable sums ``E_x[a] + E_y[b]`` as BasisIndex list."""
        ex, _, ey, _ = self.axis_states()
        sums = ex[None, :] + ey[:, None]  # sums[b, a]
        order = np.argsort(sums, axis=None, kind="stable")[:count]
        b, a = np.unravel_index(order, sums.shape)
        return [BasisIndex(int(i), int(j)) for i, j in zip(a, b)]

    def parents(self, vectors, margin=8):
        """Assign every column of ``vectors`` a distinct 1D-product parent state.

        Parents maximise the total weight ``|<n_x, n_y | v>|**2`` over the
        lowest ``len(vectors) + margin`` separable products.
        """
        ncol = np.asarray(vectors).shape[1]
        candidates = self.lowest_products(min(ncol + margin, self.dim))
        weights = self.product_weights(vectors, candidates)
        rows, cols = linear_sum_assignment(-weights)
        out = [None] * ncol
        for r, c in zip(rows, cols):
            out[r] = candidates[c]
        return out, weights[rows, cols]


def _eigvalsh(a):
    return Spectrum(scipy.linalg.eigvalsh(a, check_finite=False).astype(complex), None, None, 1.0)


def _split_pair(a, b):
    return a.imag < 0 and b.imag > 0 and a.real == b.real and a.imag == -b.imag
