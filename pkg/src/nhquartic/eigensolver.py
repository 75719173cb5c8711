"""Dense eigendecompositions and reality classification of spectra.

Both solvers delegate to LAPACK through :mod:`scipy.linalg` (``syevr`` for
symmetric input; Hessenberg reduction plus shifted QR, ``geev``, for general
input) and then enforce the package contracts: ordering, unit eigenvectors,
residual bounds.  Residuals are reported relative to the Frobenius norm.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import BrokenConjugacyError, InvalidArgumentError, SolverFailureError

__all__ = [
    "DEFAULT_REALITY_EPS",
    "Spectrum",
    "RealityPartition",
    "eig_symmetric",
    "eig_general",
    "sort_order",
    "classify_reality",
    "multiset_distance",
]

DEFAULT_REALITY_EPS = 1e-8


@dataclass
class Spectrum:
    """Eigenvalues sorted by (real part, imaginary part).

    ``eigenvectors[:, i]`` is the unit right eigenvector for
    ``eigenvalues[i]``; ``residuals[i]`` is ``|A v - e v| / |A|_F``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = None
    residuals: np.ndarray = None
    norm: float = 1.0

    def __len__(self):
        return len(self.eigenvalues)

    def take(self, idx):
        idx = np.asarray(idx)
        return Spectrum(
            self.eigenvalues[idx],
            None if self.eigenvectors is None else self.eigenvectors[:, idx],
            None if self.residuals is None else self.residuals[idx],
            self.norm,
        )

    def lowest(self, count):
        return self.take(np.arange(min(count, len(self))))


SORT_RTOL = 1e-12


def sort_order(values, rtol=SORT_RTOL):
    """Indices sorting complex values by real part, then imaginary part.

    Real parts closer than ``rtol * max(1, |Re|)`` (chained between
    neighbours) count as equal, so rounding noise in the real parts of a
    conjugate pair cannot put ``+i`` ahead of ``-i``.
    """
    values = np.asarray(values)
    order = np.lexsort((values.imag, values.real))
    re = values.real[order]
    gaps = np.diff(re) > rtol * np.maximum(1.0, np.abs(re[1:]))
    group = np.concatenate([[0], np.cumsum(gaps)])
    return order[np.lexsort((values.imag[order], group))]


def _power_of_two_scale(norm):
    """Exact scale factor bringing ``norm`` near 1 (no rounding in ``A * scale``)."""
    if norm == 0 or not np.isfinite(norm):
        return 1.0
    return float(np.ldexp(1.0, -int(np.round(np.log2(norm)))))


def _residuals(A, values, vectors, norm):
    r = A @ vectors - vectors * values[None, :]
    return np.linalg.norm(r, axis=0) / (norm if norm > 0 else 1.0)


def eig_symmetric(A, tol=1e-12, symmetry_tol=1e-13):
    """All eigenpairs of a real symmetric matrix, ascending."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {A.shape}")
    if np.iscomplexobj(A):
        if np.abs(A.imag).max(initial=0.0) != 0.0:
            raise InvalidArgumentError("eig_symmetric needs a real matrix")
        A = A.real
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix has non-finite entries")
    norm = float(np.linalg.norm(A))
    asym = float(np.abs(A - A.T).max(initial=0.0))
    if asym > symmetry_tol * max(norm, 1.0):
        raise InvalidArgumentError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    scale = _power_of_two_scale(norm)
    try:
        values, vectors = scipy.linalg.eigh(A * scale, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SolverFailureError(f"symmetric eigensolver did not converge: {exc}") from exc
    values = values / scale
    residuals = _residuals(A, values, vectors, norm)
    worst = residuals.max(initial=0.0)
    if worst > tol:
        raise SolverFailureError(f"eigenpair residual {worst:.3e} exceeds {tol:.1e}")
    return Spectrum(values.astype(complex), vectors, residuals, norm)


def eig_general(A, vectors=True, count=None, tol=1e-10):
    """Eigenpairs of a general (real or complex) square matrix.

    Sorted by (Re, Im).  With ``count`` only the ``count`` first pairs in
    that order are kept, and only their residuals are evaluated.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix has non-finite entries")
    norm = float(np.linalg.norm(A))
    scale = _power_of_two_scale(norm)
    # entries far below rounding level mislead the balancing step of geev;
    # zeroing them is a perturbation smaller than the backward error
    tiny = np.abs(A) < np.finfo(float).eps * norm / A.shape[0]
    if tiny.any():
        A = np.where(tiny, 0, A)
    try:
        if vectors:
            values, vecs = scipy.linalg.eig(A * scale, right=True, check_finite=False)
        else:
            values, vecs = scipy.linalg.eigvals(A * scale, check_finite=False), None
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SolverFailureError(f"general eigensolver did not converge: {exc}") from exc
    values = values.astype(complex) / scale
    order = sort_order(values)
    if count is not None:
        order = order[:count]
    values = values[order]
    if vecs is None:
        return Spectrum(values, None, None, norm)
    vecs = vecs[:, order].astype(complex)
    vecs /= np.linalg.norm(vecs, axis=0)[None, :]
    residuals = _residuals(A, values, vecs, norm)
    worst = residuals.max(initial=0.0)
    if worst > tol:
        raise SolverFailureError(f"eigenpair residual {worst:.3e} exceeds {tol:.1e}")
    return Spectrum(values, vecs, residuals, norm)


@dataclass(frozen=True)
class RealityPartition:
    """Indices of real eigenvalues and of conjugate pairs ``(upper, lower)``."""

    real: tuple
    pairs: tuple

    def partner(self, i):
        for a, b in self.pairs:
            if a == i:
                return b
            if b == i:
                return a
        return None


def classify_reality(spectrum, eps=DEFAULT_REALITY_EPS):
    """Split a spectrum into real levels and complex-conjugate pairs.

    A value counts as real when ``|Im| <= eps * max(1, |Re|)``.  The others
    are paired with the value closest to their complex conjugate; a value
    whose best partner is farther than ``10 * eps * max(1, |Re|)`` raises
    BrokenConjugacyError.
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps!r}")
    values = np.asarray(getattr(spectrum, "eigenvalues", spectrum), dtype=complex)
    scale = np.maximum(1.0, np.abs(values.real))
    is_real = np.abs(values.imag) <= eps * scale
    upper = np.flatnonzero(~is_real & (values.imag > 0))
    lower = np.flatnonzero(~is_real & (values.imag < 0))
    if len(upper) != len(lower):
        raise BrokenConjugacyError(
            f"{len(upper)} eigenvalues above and {len(lower)} below the real axis"
        )
    pairs = []
    if len(upper):
        cost = np.abs(values[upper][:, None] - np.conj(values[lower])[None, :])
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            i, j = int(upper[r]), int(lower[c])
            limit = 10 * eps * max(scale[i], scale[j])
            if cost[r, c] > limit:
                raise BrokenConjugacyError(
                    f"eigenvalue {values[i]:.12g} has no conjugate partner"
                    f" (closest conjugate image at distance {cost[r, c]:.3e})"
                )
            pairs.append((i, j))
        pairs.sort()
    return RealityPartition(tuple(int(i) for i in np.flatnonzero(is_real)), tuple(pairs))


def multiset_distance(a, b):
    """Largest distance after optimal one-to-one matching of two value sets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if len(a) != len(b):
        raise InvalidArgumentError("multisets differ in size")
    if len(a) == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())

