"""Point-group labels for product states and computed eigenvectors.

Labels under the inversion group Ci and under D2h = {E, P, Px, Py} follow
from the axis parities ``(-1)**n_x`` and ``(-1)**n_y`` of a product state:

    (even, even) -> Ag    (odd, odd) -> Bg    (even, odd) -> Au    (odd, even) -> Bu

For the square oscillator (identical axes) the coordinate swap ``x <-> y``
adds the diagonal reflections, giving C4v; the ``xy`` perturbation keeps
the subgroup C2v = {E, P, swap, swap*P}.  States are labelled in those
groups by character projection.

The antiunitary symmetries ``T Px`` and ``T Py`` of ``H0 + i lam W`` have no
matrix representation here; their consequence, a spectrum closed under
complex conjugation, is checked on computed spectra instead.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "GROUP_LABELS",
    "IrrepLabel",
    "StateLabel",
    "DegeneratePair",
    "basis_irrep",
    "parity_label",
    "state_irrep",
    "swap_permutation",
    "c4v_degenerate_pairs",
]

GROUP_LABELS = {
    "Ci": ("Ag", "Au"),
    "D2h": ("Ag", "Bg", "Au", "Bu"),
    "C2v": ("A1", "A2", "B1", "B2"),
    "C4v": ("A1", "A2", "B1", "B2", "E"),
}

# characters per conjugacy class: C2v (E, C2, swap, swap*C2); C4v (E, C2, 2C4, 2sv, 2sd)
_C2V_TABLE = {
    "A1": (1, 1, 1, 1),
    "A2": (1, 1, -1, -1),
    "B1": (1, -1, 1, -1),
    "B2": (1, -1, -1, 1),
}
_C4V_TABLE = {
    "A1": (1, 1, 1, 1, 1),
    "A2": (1, 1, 1, -1, -1),
    "B1": (1, 1, -1, 1, -1),
    "B2": (1, 1, -1, -1, 1),
    "E": (2, -2, 0, 0, 0),
}


@dataclass(frozen=True)
class IrrepLabel:
    group: str
    label: str

    def __post_init__(self):
        if self.group not in GROUP_LABELS:
            raise InvalidArgumentError(f"unsupported group {self.group!r}")
        if self.label not in GROUP_LABELS[self.group]:
            raise InvalidArgumentError(f"{self.label!r} is not an irrep of {self.group}")

    def __str__(self):
        return self.label


def _check_group(group, allowed):
    if group not in allowed:
        raise InvalidArgumentError(f"group must be one of {sorted(allowed)}, got {group!r}")


def parity_label(parity_x, parity_y, group):
    """Ci or D2h label of a state with the given axis parities (+1 or -1)."""
    _check_group(group, ("Ci", "D2h"))
    if group == "Ci":
        return IrrepLabel("Ci", "Ag" if parity_x * parity_y == 1 else "Au")
    name = {(1, 1): "Ag", (-1, -1): "Bg", (1, -1): "Au", (-1, 1): "Bu"}[(int(parity_x), int(parity_y))]
    return IrrepLabel("D2h", name)


def basis_irrep(n, group):
    """Label of the product state ``|n_x, n_y>`` under Ci or D2h."""
    nx, ny = n
    if nx < 0 or ny < 0:
        raise InvalidArgumentError(f"quantum numbers must be non-negative, got {n!r}")
    return parity_label((-1) ** nx, (-1) ** ny, group)


@dataclass(frozen=True)
class StateLabel:
    """Dominant irrep of a state, its weight, and the full weight table."""

    label: IrrepLabel
    purity: float
    weights: dict = field(compare=False)
    definite: bool = True

    def __str__(self):
        return str(self.label) if self.definite else f"{self.label}?"


def swap_permutation(shape):
    """``perm`` with ``(S v)[k] = v[perm[k]]`` for the swap ``|a, b> -> |b, a>``."""
    nx, ny = shape
    if nx != ny:
        raise InvalidArgumentError("coordinate swap needs identical x and y bases")
    a = np.tile(np.arange(nx), ny)
    b = np.repeat(np.arange(ny), nx)
    return b + nx * a


def _shape_of(basis):
    shape = getattr(basis, "shape", None)
    if shape is None:
        raise InvalidArgumentError("basis does not expose a (x_size, y_size) shape")
    return tuple(shape)


def _projection_weights(v, basis, group):
    if getattr(basis, "swap_symmetric", True) is False:
        raise InvalidArgumentError(f"{group} labels need a model symmetric under x <-> y")
    px = np.asarray(basis.parity_x)
    py = np.asarray(basis.parity_y)
    if not np.array_equal(np.sort(px), np.sort(py)):
        raise InvalidArgumentError(f"{group} labels need identical x and y bases")
    perm = swap_permutation(_shape_of(basis))

    def swap(u):
        return u[perm]

    def expect(u):
        return np.vdot(v, u).real

    pv = px * py * v
    e, c2 = expect(v), expect(pv)
    sd = expect(swap(v)) + expect(swap(pv))
    if group == "C2v":
        classes = (e, c2, expect(swap(v)), expect(swap(pv)))
        table, order = _C2V_TABLE, 4
    else:
        c4 = expect(swap(px * v)) + expect(swap(py * v))
        sv = expect(px * v) + expect(py * v)
        classes = (e, c2, c4, sv, sd)
        table, order = _C4V_TABLE, 8
    weights = {}
    for name, chars in table.items():
        dim = chars[0]
        weights[name] = dim * sum(c * x for c, x in zip(chars, classes)) / order
    return weights


def state_irrep(v, basis, group, purity_threshold=0.99):
    """Dominant irrep of the (unit) state ``v``.

    For Ci and D2h the weight of an irrep is the squared norm of the
    components on basis states with that label; for C2v and C4v it is the
    character projection.  A state whose dominant weight falls below
    ``purity_threshold`` is returned with ``definite=False``.
    """
    _check_group(group, GROUP_LABELS)
    if not 0.5 < purity_threshold <= 1.0:
        raise InvalidArgumentError("purity_threshold must lie in (0.5, 1]")
    v = np.asarray(v)
    norm2 = float(np.vdot(v, v).real)
    if norm2 == 0:
        raise InvalidArgumentError("zero vector has no symmetry label")
    v = v / np.sqrt(norm2)
    if group in ("Ci", "D2h"):
        px = np.asarray(basis.parity_x)
        py = np.asarray(basis.parity_y)
        prob = np.abs(v) ** 2
        weights = {name: 0.0 for name in GROUP_LABELS[group]}
        for sx in (1, -1):
            for sy in (1, -1):
                w = float(prob[(px == sx) & (py == sy)].sum())
                weights[parity_label(sx, sy, group).label] += w
    else:
        weights = _projection_weights(v, basis, group)
    best = max(GROUP_LABELS[group], key=lambda name: weights[name])
    purity = float(weights[best])
    return StateLabel(IrrepLabel(group, best), purity, weights, purity >= purity_threshold)


@dataclass(frozen=True)
class DegeneratePair:
    """Indices of two degenerate levels forming an E doublet, with their parents."""

    first: int
    second: int
    parents: tuple


def _dominant_parents(spectrum, basis):
    parents = getattr(basis, "parents", None)
    if callable(parents):
        return parents(spectrum.eigenvectors)[0]
    nx, ny = basis.quantum_numbers
    idx = np.argmax(np.abs(spectrum.eigenvectors), axis=0)
    return [(int(nx[i]), int(ny[i])) for i in idx]


def c4v_degenerate_pairs(spectrum, basis, tol=1e-8):
    """E-representation doublets of a square-oscillator ``H0`` spectrum.

    A doublet is two levels equal within ``tol`` whose parent product states
    are swap images ``(a, b)`` and ``(b, a)`` with one index even and the
    other odd.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    if spectrum.eigenvectors is None:
        raise InvalidArgumentError("eigenvectors are required to identify parents")
    parents = [tuple(p) for p in _dominant_parents(spectrum, basis)]
    values = np.asarray(spectrum.eigenvalues)
    where = {p: i for i, p in enumerate(parents)}
    out = []
    for i, (a, b) in enumerate(parents):
        if (a + b) % 2 == 0 or a > b:
            continue
        j = where.get((b, a))
        if j is None or abs(values[i] - values[j]) > tol:
            continue
        out.append(DegeneratePair(min(i, j), max(i, j), ((a, b), (b, a))))
    out.sort(key=lambda p: p.first)
    return out
