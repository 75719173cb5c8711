import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhquartic import BasisConfig, GridConfig, ModelParams
from nhquartic.errors import InvalidArgumentError, InvalidBracketError
from nhquartic.sweep import (
    SweepConfig,
    count_phase_transitions,
    find_exceptional_point,
    matrix_family_predicate,
    run_sweep,
)

from conftest import SQRT2


def two_level(lam):
    # eigenvalues +-sqrt(1 - lam**2): real below lam = 1, a conjugate pair above
    return np.array([[1j * lam, 1.0], [1.0, -1j * lam]])


def test_two_level_exceptional_point():
    pred = matrix_family_predicate(two_level)
    ep = find_exceptional_point(pred, 0.5, 1.7, 1e-10)
    assert ep.lambda_low <= 1.0 <= ep.lambda_high
    assert ep.width <= 1e-10
    assert ep.direction == "real->complex"
    assert ep.estimate == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(1.01, 3.0))
def test_bracket_halves_every_step(lo, hi):
    ep = find_exceptional_point(matrix_family_predicate(two_level), lo, hi, 1e-6)
    w = np.array(ep.widths)
    assert np.allclose(w[1:], w[:-1] / 2, rtol=1e-9, atol=0)
    assert ep.lambda_low <= 1.0 <= ep.lambda_high


def test_invalid_brackets():
    pred = matrix_family_predicate(two_level)
    with pytest.raises(InvalidBracketError):
        find_exceptional_point(pred, 0.1, 0.5, 1e-6)
    with pytest.raises(InvalidBracketError):
        find_exceptional_point(pred, 1.5, 2.0, 1e-6)
    with pytest.raises(InvalidArgumentError):
        find_exceptional_point(pred, 2.0, 0.5, 1e-6)
    with pytest.raises(InvalidArgumentError):
        find_exceptional_point(pred, 0.5, 2.0, 0.0)


def test_transition_counts():
    herm = matrix_family_predicate(lambda lam: np.array([[1.0, lam], [lam, -1.0]]))
    assert count_phase_transitions(herm, 0.0, 2.0, 21, 1e-8).count == 0
    tc = count_phase_transitions(matrix_family_predicate(two_level), 0.0, 2.0, 21, 1e-8)
    assert tc.count == 1
    assert tc.exceptional_points[0].estimate == pytest.approx(1.0, abs=1e-8)


def test_config_validation():
    for bad in (
        dict(lambda_start=1.0, lambda_end=1.0),
        dict(lambda_start=-0.1),
        dict(lambda_end=math.inf),
        dict(steps=1),
        dict(tracked_levels=0),
        dict(method="rpm"),
        dict(reality_eps=0.0),
        dict(workers=0),
    ):
        with pytest.raises(InvalidArgumentError):
            SweepConfig(**bad)
    cfg = SweepConfig(0.0, 1.0, 11)
    assert cfg.step == pytest.approx(0.1)
    assert isinstance(SweepConfig(method="pseudospectral").default_discretization(), GridConfig)


def test_method_must_match_discretization():
    with pytest.raises(InvalidArgumentError):
        run_sweep(SweepConfig(0, 1, 3, method="pseudospectral"), ModelParams(), BasisConfig(6))


@pytest.fixture(scope="module")
def sum_sweep():
    cfg = SweepConfig(0.0, 4.0, 41, 4, ep_tol=1e-8)
    return run_sweep(cfg, ModelParams(1.0, SQRT2, "x2y+xy2"), BasisConfig(16))


def test_sweep_starts_from_h0(sum_sweep, problems):
    e0 = problems(16, "x2y+xy2").spectrum(0.0, count=4, vectors=False).eigenvalues
    assert np.allclose([br.values[0] for br in sum_sweep.branches], e0, atol=1e-12, rtol=0)
    assert [br.parent for br in sum_sweep.branches] == [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_sum_perturbation_pairs_opposite_inversion(sum_sweep):
    assert len(sum_sweep.pairs) == 1
    pair = sum_sweep.pairs[0]
    assert pair.parents == ((0, 1), (1, 1))
    a, b = (sum_sweep.branches[i] for i in pair.branch_ids)
    assert {a.ancestry_ci, b.ancestry_ci} == {"Ag", "Au"}
    assert pair.count == 1
    # coarse basis: within a few 1e-3 of the converged location
    assert pair.transitions.exceptional_points[0].estimate == pytest.approx(3.29, abs=5e-3)


def test_pair_is_real_below_and_conjugate_above(sum_sweep):
    pair = sum_sweep.pairs[0]
    ep = pair.transitions.exceptional_points[0]
    a, b = (sum_sweep.branches[i] for i in pair.branch_ids)
    for lv_a, lv_b in zip(a.levels, b.levels):
        if lv_a.lam < ep.lambda_low - 0.1:
            assert abs(lv_a.value.imag) <= 1e-8 and lv_a.partner is None
        elif lv_a.lam > ep.lambda_high + 0.1:
            assert lv_a.value == pytest.approx(np.conj(lv_b.value), abs=1e-12)
            assert abs(lv_a.value.imag) > 1e-4


def test_sweep_is_continuous(sum_sweep):
    assert sum_sweep.faults == []
    assert sum_sweep.overlap_violations() == []
    assert all(lv.residual <= 1e-10 for br in sum_sweep.branches for lv in br.levels)


def test_xy_keeps_inversion_labels():
    cfg = SweepConfig(0.0, 1.0, 21, 6)
    res = run_sweep(cfg, ModelParams(1.0, SQRT2, "xy"), BasisConfig(16))
    for br in res.branches:
        assert {str(lv.ci) for lv in br.levels} == {br.ancestry_ci}
    for pair in res.pairs:
        a, b = (res.branches[i] for i in pair.branch_ids)
        assert a.ancestry_ci == b.ancestry_ci


def test_step_doubling_keeps_counts(sum_sweep):
    cfg = SweepConfig(0.0, 4.0, 81, 4, ep_tol=1e-8)
    fine = run_sweep(cfg, ModelParams(1.0, SQRT2, "x2y+xy2"), BasisConfig(16))
    assert [(p.parents, p.count) for p in fine.pairs] == [(p.parents, p.count) for p in sum_sweep.pairs]
    a = fine.pairs[0].transitions.exceptional_points[0].estimate
    b = sum_sweep.pairs[0].transitions.exceptional_points[0].estimate
    assert a == pytest.approx(b, abs=1e-7)
