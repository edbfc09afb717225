import numpy as np
import pytest
from numpy.testing import assert_allclose

import measures
import roof
import states
from errors import BadParameter, RankTooHigh, WrongDimension
from roof import Direction, RestartBudget, RoofMeasure

SMALL = RestartBudget(restarts=4)


@pytest.fixture
def w3_pair(w3):
    return states.partial_trace(w3, [0, 1])


def test_pure_input_short_circuits(w3):
    result = roof.roof_optimize(w3, budget=SMALL)
    assert result.restarts_used == 0
    assert result.value == pytest.approx(measures.concurrence_pure(w3), abs=1e-10)


def test_w_pair_concurrence_roof(w3_pair):
    # all but one Wootters lambda vanish, so min and max coincide
    low = roof.roof_optimize(w3_pair, kind=RoofMeasure.CONCURRENCE, direction=Direction.MIN, budget=SMALL)
    high = roof.roof_optimize(w3_pair, kind=RoofMeasure.CONCURRENCE, direction=Direction.MAX, budget=SMALL)
    assert low.value == pytest.approx(2 / 3, abs=2e-3)
    assert high.value == pytest.approx(2 / 3, abs=2e-3)


def test_roof_bounds_are_one_sided():
    for i in range(3):
        rho = states.random_rank_deficient(2, 1, [21, i])
        low = roof.roof_optimize(rho, direction=Direction.MIN, budget=SMALL)
        high = roof.roof_optimize(rho, direction=Direction.MAX, budget=SMALL)
        assert low.value >= measures.concurrence_mixed(rho) - 1e-6
        assert high.value <= measures.coa(rho) + 1e-6
        assert low.value <= high.value + 1e-9


def test_best_decomposition_reconstructs_state(w3_pair):
    result = roof.roof_optimize(w3_pair, budget=SMALL)
    assert_allclose(result.best.reconstruct(), w3_pair.matrix, atol=1e-10)
    assert result.best.weights.sum() == pytest.approx(1.0)


def test_roof_is_deterministic(w3_pair):
    a = roof.roof_optimize(w3_pair, kind=RoofMeasure.EOF, budget=SMALL)
    b = roof.roof_optimize(w3_pair, kind=RoofMeasure.EOF, budget=SMALL)
    assert a.value == b.value
    assert a.restart_values == b.restart_values


def test_restart_budget_bounds_restarts(w3_pair):
    result = roof.roof_optimize(w3_pair, budget=RestartBudget(restarts=2, evals_per_param=5, early_stop=False))
    assert result.restarts_used == 2
    assert not result.converged


def test_eof_roof_upper_bounds_closed_form(w3_pair):
    result = roof.roof_optimize(w3_pair, kind=RoofMeasure.EOF, direction=Direction.MIN, budget=SMALL)
    assert result.value >= measures.eof_two_qubit(w3_pair) - 1e-6


def test_eoa_at_least_eof(w3_pair):
    assert roof.eoa(w3_pair, SMALL) >= measures.eof_two_qubit(w3_pair) - 1e-6


def test_eoa_needs_two_qubits(w3):
    with pytest.raises(WrongDimension):
        roof.eoa(states.from_pure(w3), SMALL)


def test_rank_limit():
    rho = states.DensityMatrix(n_qubits=4, matrix=np.eye(16) / 16)
    with pytest.raises(RankTooHigh):
        roof.roof_optimize(rho, budget=SMALL)


def test_pure_measures_vectorized(w3):
    vectors = np.stack([w3.amplitudes, states.product_state([0, 0, 0]).amplitudes])
    c = roof.pure_measures(vectors, 3, 0, RoofMeasure.CONCURRENCE)
    e = roof.pure_measures(vectors, 3, 0, RoofMeasure.EOF)
    assert_allclose(c, [2 * np.sqrt(2) / 3, 0.0], atol=1e-12)
    assert_allclose(e, [0.918296, 0.0], atol=1e-6)


@pytest.mark.parametrize("kind", [RoofMeasure.CONCURRENCE, RoofMeasure.EOF])
def test_row_objective_gradient_matches_finite_difference(kind):
    rng = np.random.default_rng(4)
    x = (rng.standard_normal((5, 8)) + 1j * rng.standard_normal((5, 8))) / 4
    d = rng.standard_normal((5, 8)) + 1j * rng.standard_normal((5, 8))
    _, grad = roof.row_objective(x, 3, 1, kind)
    h = 1e-6
    plus, _ = roof.row_objective(x + h * d, 3, 1, kind, want_grad=False)
    minus, _ = roof.row_objective(x - h * d, 3, 1, kind, want_grad=False)
    assert (plus - minus) / (2 * h) == pytest.approx(2 * np.real(np.vdot(d, grad)), rel=1e-5)


def test_haar_isometry_columns_orthonormal():
    u = roof.haar_isometry(6, 3, np.random.default_rng(0))
    assert_allclose(u.conj().T @ u, np.eye(3), atol=1e-12)


def test_maximally_mixed_assistance():
    rho = states.DensityMatrix(n_qubits=2, matrix=np.eye(4) / 4)
    high = roof.roof_optimize(rho, kind=RoofMeasure.CONCURRENCE, direction=Direction.MAX, budget=SMALL)
    assert high.value == pytest.approx(1.0, abs=1e-3)
    assert high.value <= 1.0 + 1e-9


def test_evaluations_are_capped(w3_pair):
    budget = RestartBudget(restarts=3, evals_per_param=2, early_stop=False)
    result = roof.roof_optimize(w3_pair, budget=budget)
    # rank 2, m = 4: 2 * 2 * 4 * 2 evaluations per restart, plus the final accepted gradient call
    assert result.evaluations <= 3 * (budget.max_evaluations(4, 2) + 1)


@pytest.mark.parametrize("field", ["restarts", "size_factor", "evals_per_param"])
def test_restart_budget_rejects_zero(field):
    with pytest.raises(BadParameter):
        RestartBudget(**{field: 0})
