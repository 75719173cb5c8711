"""Tensor-product assembly of H = H0 + i*lam*W for the 2D quartic oscillator.

    H0 = -1/2 (d2/dx2 + d2/dy2) + alpha_x x**4 + alpha_y y**4

Product states are enumerated with ``n_x`` fastest, so the flat index of
``|n_x, n_y>`` is ``n_x + x_size * n_y`` and a separable operator
``A_x (x) A_y`` is assembled as ``np.kron(A_y, A_x)``.

The assembly only needs, per axis, the kinetic matrix, the matrices of
``x**k`` for ``k <= 4`` and the reflection parity of every 1D basis
function.  The oscillator basis supplies them here; the sinc grid supplies
them in :mod:`nhquartic.pseudospectral`.
"""

from dataclasses import dataclass, field
import enum
import math

import numpy as np

from . import basis1d
from .errors import InternalConsistencyError, InvalidArgumentError, ResourceLimitError

__all__ = [
    "MAX_DIMENSION",
    "Perturbation",
    "Operation",
    "ModelParams",
    "ProductBasis",
    "AxisOperators",
    "Block",
    "build_h0",
    "build_w",
    "build_h",
    "assemble_h0",
    "assemble_w",
    "residual_unitary_symmetries",
    "conjugating_reflection",
    "operation_signs",
    "symmetry_blocks",
    "real_similarity",
]

# Largest dense matrix dimension the assembly routines will build.
MAX_DIMENSION = 6400


def ipow(x, k):
    """``x**k`` for small integer ``k`` by repeated multiplication.

    Vectorised ``numpy.power`` may round ``(-a)**4`` and ``a**4``
    differently; products keep reflected grids exactly symmetric.
    """
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    for _ in range(k):
        out = out * x
    return out


class Perturbation(enum.Enum):
    XY = "xy"
    X2Y = "x2y"
    XY2 = "xy2"
    X2Y_PLUS_XY2 = "x2y+xy2"

    @property
    def monomials(self):
        """Exponent pairs ``(i, j)`` of the terms ``x**i * y**j``."""
        return {
            Perturbation.XY: ((1, 1),),
            Perturbation.X2Y: ((2, 1),),
            Perturbation.XY2: ((1, 2),),
            Perturbation.X2Y_PLUS_XY2: ((2, 1), (1, 2)),
        }[self]

    def __call__(self, x, y):
        return sum(ipow(x, i) * ipow(y, j) for i, j in self.monomials)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace(" ", "")
        aliases = {"x2y+y2x": "x2y+xy2", "xy2+x2y": "x2y+xy2", "x2y_plus_xy2": "x2y+xy2"}
        text = aliases.get(text, text)
        for member in cls:
            if member.value == text or member.name.lower() == text:
                return member
        raise InvalidArgumentError(f"unknown perturbation {value!r}")


class Operation(enum.Enum):
    """Coordinate reflections ``E, P, P_x, P_y`` of the anisotropic oscillator."""

    E = "E"
    P = "P"
    PX = "Px"
    PY = "Py"

    def character(self, parity_x, parity_y):
        """Eigenvalue of a product state with the given axis parities."""
        if self is Operation.E:
            return np.ones_like(parity_x)
        if self is Operation.P:
            return parity_x * parity_y
        if self is Operation.PX:
            return parity_x
        return parity_y

    def monomial_sign(self, i, j):
        """Sign picked up by ``x**i * y**j`` under this reflection."""
        sx, sy = (-1) ** i, (-1) ** j
        return int(self.character(np.array(sx), np.array(sy)))


@dataclass(frozen=True)
class ModelParams:
    alpha_x: float = 1.0
    alpha_y: float = math.sqrt(2.0)
    perturbation: Perturbation = Perturbation.XY
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "perturbation", Perturbation.parse(self.perturbation))
        for name in ("alpha_x", "alpha_y"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InvalidArgumentError(f"lam must be non-negative and finite, got {self.lam!r}")

    def with_lambda(self, lam):
        return ModelParams(self.alpha_x, self.alpha_y, self.perturbation, lam)


@dataclass(frozen=True)
class ProductBasis:
    x_basis: basis1d.Basis1D
    y_basis: basis1d.Basis1D

    @classmethod
    def for_model(cls, params, x_size, y_size=None, scale_x=None, scale_y=None):
        """Product basis with the default per-axis scales for ``params``."""
        y_size = x_size if y_size is None else y_size
        scale_x = basis1d.default_scale(params.alpha_x) if scale_x is None else scale_x
        scale_y = basis1d.default_scale(params.alpha_y) if scale_y is None else scale_y
        return cls(basis1d.Basis1D(x_size, scale_x), basis1d.Basis1D(y_size, scale_y))

    @property
    def shape(self):
        return self.x_basis.size, self.y_basis.size

    @property
    def dim(self):
        return self.x_basis.size * self.y_basis.size

    def index(self, nx, ny):
        if not (0 <= nx < self.x_basis.size and 0 <= ny < self.y_basis.size):
            raise InvalidArgumentError(f"({nx}, {ny}) outside basis of shape {self.shape}")
        return nx + self.x_basis.size * ny

    def pair(self, index):
        ny, nx = divmod(int(index), self.x_basis.size)
        return nx, ny

    @property
    def quantum_numbers(self):
        """Arrays ``(n_x, n_y)`` for every flat index."""
        nx, ny = self.shape
        return np.tile(np.arange(nx), ny), np.repeat(np.arange(ny), nx)

    @property
    def parity_x(self):
        return np.tile(self.x_basis.parity, self.y_basis.size)

    @property
    def parity_y(self):
        return np.repeat(self.y_basis.parity, self.x_basis.size)


@dataclass(frozen=True)
class AxisOperators:
    """1D operator set: kinetic matrix, ``x**k`` for k = 1..4, parities."""

    kinetic: np.ndarray
    powers: dict = field(repr=False)
    parity: np.ndarray

    @property
    def size(self):
        return self.kinetic.shape[0]

    @classmethod
    def from_basis(cls, basis):
        powers = {k: basis1d.position_power_matrix(basis, k) for k in (1, 2, 3, 4)}
        return cls(basis1d.kinetic_matrix(basis), powers, basis.parity)

    def hamiltonian(self, alpha):
        """``-1/2 d2/dx2 + alpha x**4`` on this axis."""
        return self.kinetic + alpha * self.powers[4]

    def power(self, k):
        if k == 0:
            return np.eye(self.size)
        return self.powers[k]


def _check_dimension(dim, max_dim):
    limit = MAX_DIMENSION if max_dim is None else max_dim
    if dim > limit:
        raise ResourceLimitError(f"matrix dimension {dim} exceeds the configured maximum {limit}")


def assemble_h0(x_ops, y_ops, alpha_x, alpha_y, max_dim=None):
    _check_dimension(x_ops.size * y_ops.size, max_dim)
    hx = x_ops.hamiltonian(alpha_x)
    hy = y_ops.hamiltonian(alpha_y)
    return np.kron(np.eye(y_ops.size), hx) + np.kron(hy, np.eye(x_ops.size))


def assemble_w(kind, x_ops, y_ops, max_dim=None):
    _check_dimension(x_ops.size * y_ops.size, max_dim)
    kind = Perturbation.parse(kind)
    out = np.zeros((x_ops.size * y_ops.size,) * 2)
    for i, j in kind.monomials:
        out += np.kron(y_ops.power(j), x_ops.power(i))
    return out


def build_h0(params, basis, max_dim=None):
    """Real symmetric matrix of H0 in the product oscillator basis."""
    _check_dimension(basis.dim, max_dim)
    return assemble_h0(
        AxisOperators.from_basis(basis.x_basis),
        AxisOperators.from_basis(basis.y_basis),
        params.alpha_x,
        params.alpha_y,
        max_dim,
    )


def build_w(kind, basis, max_dim=None):
    """Real symmetric matrix of the polynomial perturbation ``kind``."""
    _check_dimension(basis.dim, max_dim)
    return assemble_w(
        kind,
        AxisOperators.from_basis(basis.x_basis),
        AxisOperators.from_basis(basis.y_basis),
        max_dim,
    )


def build_h(params, basis, max_dim=None):
    """Complex-symmetric matrix of ``H0 + i*lam*W``."""
    h0 = build_h0(params, basis, max_dim)
    w = build_w(params.perturbation, basis, max_dim)
    return h0 + 1j * (params.lam * w)


def residual_unitary_symmetries(kind):
    """Reflections of the set {E, P, Px, Py} that leave W invariant."""
    kind = Perturbation.parse(kind)
    return frozenset(
        op for op in Operation if all(op.monomial_sign(i, j) == 1 for i, j in kind.monomials)
    )


def conjugating_reflection(kind):
    """A reflection ``S`` with ``S W S = -W``.

    Together with time reversal it makes ``H`` invariant under the
    antiunitary ``T S``, so the spectrum is closed under complex
    conjugation.  Returns ``None`` if no reflection reverses every term.
    """
    kind = Perturbation.parse(kind)
    for op in (Operation.P, Operation.PX, Operation.PY):
        if all(op.monomial_sign(i, j) == -1 for i, j in kind.monomials):
            return op
    return None


def operation_signs(basis, op):
    """Character of ``op`` on every basis state of ``basis``."""
    return op.character(np.asarray(basis.parity_x), np.asarray(basis.parity_y)).astype(int)


@dataclass(frozen=True)
class Block:
    matrix: np.ndarray
    signature: tuple
    indices: np.ndarray


def symmetry_blocks(H, basis, ops):
    """Split ``H`` into blocks of equal parity signature under ``ops``.

    ``basis`` is anything with ``parity_x`` and ``parity_y`` arrays.  The
    signature of a block is a tuple of ``(operation name, character)`` pairs
    ordered as in :class:`Operation`.  Raises InternalConsistencyError if
    ``H`` couples two different signatures.
    """
    H = np.asarray(H)
    ordered = [op for op in Operation if op in ops and op is not Operation.E]
    if not ordered:
        return [Block(H, (), np.arange(H.shape[0]))]
    chars = np.stack([operation_signs(basis, op) for op in ordered], axis=1)
    if chars.shape[0] != H.shape[0]:
        raise InvalidArgumentError("matrix and basis dimensions differ")
    keys, inverse = np.unique(chars, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)

    same = inverse[:, None] == inverse[None, :]
    leak = np.abs(H[~same]).max(initial=0.0)
    if leak != 0.0:
        raise InternalConsistencyError(
            f"matrix couples states of different parity under {[op.value for op in ordered]}"
            f" (largest off-block entry {leak:.3e})"
        )

    # Order blocks with all-even signatures first, then by signature.
    order = sorted(range(len(keys)), key=lambda b: tuple(-keys[b]))
    blocks = []
    for b in order:
        idx = np.flatnonzero(inverse == b)
        signature = tuple((op.value, int(c)) for op, c in zip(ordered, keys[b]))
        blocks.append(Block(H[np.ix_(idx, idx)], signature, idx))
    return blocks


def real_similarity(h0, w, lam, signs):
    """Real matrix similar to ``h0 + 1j*lam*w`` for a conjugating reflection.

    ``signs`` are the characters of a reflection ``S`` with ``S h0 S = h0``
    and ``S w S = -w``.  With ``D = diag(1 if s = +1 else 1j)`` the product
    ``D^-1 (h0 + i lam w) D`` equals ``h0 + lam * w * (s_k - s_j) / 2`` and
    is real; eigenvectors of ``H`` are ``D`` times those of this matrix.

    Returns ``(R, d)`` with ``d`` the diagonal of ``D``.
    """
    signs = np.asarray(signs)
    factor = (signs[None, :] - signs[:, None]) / 2.0
    odd = signs[:, None] != signs[None, :]
    if np.abs(h0[odd]).max(initial=0.0) != 0.0 or np.abs(w[~odd]).max(initial=0.0) != 0.0:
        raise InternalConsistencyError("reflection does not conjugate the Hamiltonian")
    d = np.where(signs == 1, 1.0 + 0.0j, 1.0j)
    return h0 + lam * (w * factor), d
