import numpy as np
import pytest
from hypothesis import given, strategies as st

from nhquartic import BasisConfig, ModelParams, Problem
from nhquartic.errors import InvalidArgumentError
from nhquartic.symmetry import (
    IrrepLabel,
    basis_irrep,
    c4v_degenerate_pairs,
    parity_label,
    state_irrep,
    swap_permutation,
)

from golden import TABLE0


@pytest.mark.parametrize("row", TABLE0, ids=lambda r: f"{r[0]}{r[1]}")
def test_table_labels(row):
    nx, ny, _, ci, d2h = row
    assert str(basis_irrep((nx, ny), "Ci")) == ci
    assert str(basis_irrep((nx, ny), "D2h")) == d2h


@given(st.integers(0, 50), st.integers(0, 50))
def test_label_depends_on_parities_only(nx, ny):
    lab = basis_irrep((nx, ny), "D2h")
    assert lab == basis_irrep((nx % 2, ny % 2), "D2h")
    ci = basis_irrep((nx, ny), "Ci")
    assert ci.label == ("Ag" if (nx + ny) % 2 == 0 else "Au")
    # Ci label is the D2h label restricted to the inversion
    assert ci.label == {"Ag": "Ag", "Bg": "Ag", "Au": "Au", "Bu": "Au"}[lab.label]


def test_label_validation():
    with pytest.raises(InvalidArgumentError):
        IrrepLabel("Oh", "A1")
    with pytest.raises(InvalidArgumentError):
        IrrepLabel("Ci", "Bg")
    with pytest.raises(InvalidArgumentError):
        basis_irrep((-1, 0), "Ci")
    with pytest.raises(InvalidArgumentError):
        parity_label(1, 1, "C4v")


def test_pure_basis_vectors(problems):
    p = problems(6, "xy")
    nx, ny = p.x_ops.size, p.y_ops.size
    for k in range(p.dim):
        v = np.zeros(p.dim)
        v[k] = 1.0
        a, b = k % nx, k // nx
        for group in ("Ci", "D2h"):
            lab = state_irrep(v, p, group)
            assert lab.purity == 1.0 and lab.definite
            assert lab.label == basis_irrep((a, b), group)
    assert ny == nx


def test_h0_eigenvectors_are_pure(problems):
    p = problems(16, "xy")
    s = p.spectrum(0.0, count=20)
    for v in s.eigenvectors.T:
        assert state_irrep(v, p, "D2h").purity >= 1 - 1e-12


def test_xy_keeps_inversion_but_mixes_d2h(problems):
    p = problems(16, "xy")
    s = p.spectrum(0.4, count=10)
    coupled = ({"Ag", "Bg"}, {"Au", "Bu"})
    mixed = 0
    for v in s.eigenvectors.T:
        ci = state_irrep(v, p, "Ci")
        assert ci.purity >= 1 - 1e-10
        d2h = state_irrep(v, p, "D2h")
        present = {k for k, w in d2h.weights.items() if w > 1e-10}
        assert any(present <= c for c in coupled)
        mixed += len(present) == 2
    assert mixed > 0


def test_sum_perturbation_mixes_inversion(problems):
    p = problems(16, "x2y+xy2")
    ground = p.spectrum(0.5, count=1).eigenvectors[:, 0]
    assert state_irrep(ground, p, "Ci").purity < 1 - 1e-6


def test_swap_permutation():
    perm = swap_permutation((3, 3))
    # flat index nx + 3 ny; swapping (1, 2) -> (2, 1)
    v = np.zeros(9)
    v[1 + 3 * 2] = 1.0
    assert v[perm][2 + 3 * 1] == 1.0
    with pytest.raises(InvalidArgumentError):
        swap_permutation((3, 4))


@pytest.fixture(scope="module")
def square():
    return Problem.build(ModelParams(1.0, 1.0, "xy"), BasisConfig(24))


def test_c4v_labels_at_lambda_zero(square):
    s = square.spectrum(0.0, count=8)
    labels = [str(state_irrep(v, square, "C4v")) for v in s.eigenvectors.T]
    assert labels[0] == "A1"
    assert labels[1:3] == ["E", "E"]
    for v in s.eigenvectors.T:
        assert state_irrep(v, square, "C4v").purity >= 1 - 1e-10


def test_c4v_doublets(square):
    s = square.spectrum(0.0, count=8)
    pairs = c4v_degenerate_pairs(s, square)
    assert pairs
    assert pairs[0].parents == ((0, 1), (1, 0))
    for d in pairs:
        (a, b), (c, e) = d.parents
        assert (c, e) == (b, a)
        assert abs(s.eigenvalues[d.first] - s.eigenvalues[d.second]) <= 1e-8


def test_no_doublets_for_rectangular_oscillator(problems):
    p = problems(16, "xy")
    assert c4v_degenerate_pairs(p.spectrum(0.0, count=8), p, tol=1e-6) == []


def test_doublets_split_into_b1_b2(square):
    s = square.spectrum(0.01, count=8)
    labels = [state_irrep(v, square, "C2v") for v in s.eigenvectors.T]
    complex_labels = {str(lab) for lab, e in zip(labels, s.eigenvalues) if abs(e.imag) > 1e-6}
    assert complex_labels == {"B1", "B2"}
    assert all(lab.purity >= 1 - 1e-8 for lab in labels)


def test_state_irrep_validation(problems):
    p = problems(4, "xy")
    with pytest.raises(InvalidArgumentError):
        state_irrep(np.zeros(p.dim), p, "Ci")
    with pytest.raises(InvalidArgumentError):
        state_irrep(np.ones(p.dim), p, "Ci", purity_threshold=0.2)
    with pytest.raises(InvalidArgumentError):
        state_irrep(np.ones(p.dim), p, "C4v")
