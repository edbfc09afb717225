import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import states
from errors import BadParameter, InvariantViolation, NotNormalized, ParseError
from states import DensityMatrix, PartitionSpec, PureState


def test_w_state_amplitudes(w3):
    expected = np.zeros(8)
    expected[[1, 2, 4]] = 1 / math.sqrt(3)
    assert_allclose(w3.amplitudes, expected)


def test_w_class_first_coefficient_on_qubit_zero():
    psi = states.w_class_state(0.0, [1.0, 0.0, 0.0])
    assert abs(psi.amplitudes[0b100]) == pytest.approx(1.0)


def test_w_class_rejects_unnormalized():
    with pytest.raises(NotNormalized):
        states.w_class_state(0.5, [0.5, 0.5])


def test_example2_is_four_qubits(example2):
    assert example2.n_qubits == 4
    assert np.linalg.norm(example2.amplitudes) == pytest.approx(1.0)


def test_pure_state_invariants():
    with pytest.raises(InvariantViolation):
        PureState(n_qubits=1, amplitudes=[1.0, 1.0])
    with pytest.raises(InvariantViolation):
        PureState(n_qubits=2, amplitudes=[1.0, 0.0])
    with pytest.raises(InvariantViolation):
        PureState(n_qubits=6, amplitudes=np.eye(64)[0])


def test_density_matrix_invariants():
    with pytest.raises(InvariantViolation):
        DensityMatrix(n_qubits=1, matrix=[[0.5, 0.0], [0.0, 0.4]])
    with pytest.raises(InvariantViolation):
        DensityMatrix(n_qubits=1, matrix=[[1.2, 0.0], [0.0, -0.2]])
    with pytest.raises(InvariantViolation):
        DensityMatrix(n_qubits=1, matrix=[[0.5, 0.3], [0.1, 0.5]])


def test_partition_spec():
    assert PartitionSpec.default(3).partners == (1, 2)
    assert PartitionSpec.default(3, focus=1).partners == (0, 2)
    with pytest.raises(InvariantViolation):
        PartitionSpec(focus=0, partners=(0, 1))
    with pytest.raises(InvariantViolation):
        PartitionSpec(focus=0, partners=(1,)).check(3)


def test_bell_and_product_states():
    phi = states.bell_state("phi+")
    assert_allclose(np.abs(phi.amplitudes) ** 2, [0.5, 0, 0, 0.5])
    assert states.product_state([1, 0]).amplitudes[2] == 1
    with pytest.raises(BadParameter):
        states.bell_state("chi")


def test_purity(w3):
    assert states.purity(w3) == 1.0
    assert states.purity(states.from_pure(w3)) == pytest.approx(1.0)
    mixed = states.isotropic_mixture(0.0, w3)
    assert states.purity(mixed) == pytest.approx(1 / 8)
    assert not states.is_pure(mixed)


def test_isotropic_mixture(w3):
    rho = states.isotropic_mixture(0.5, w3)
    assert np.trace(rho.matrix).real == pytest.approx(1.0)
    with pytest.raises(BadParameter):
        states.isotropic_mixture(1.5, w3)


def test_dominant_vector_recovers_pure_state(w3):
    psi = states.dominant_vector(states.from_pure(w3))
    assert abs(np.vdot(psi.amplitudes, w3.amplitudes)) == pytest.approx(1.0)


def test_partial_trace_of_w_pair(w3):
    rho_ab = states.partial_trace(w3, [0, 1]).matrix
    expected = np.zeros((4, 4))
    expected[0, 0] = 1 / 3
    expected[1:3, 1:3] = 1 / 3
    assert_allclose(rho_ab, expected, atol=1e-12)


def test_haar_sampling_is_seeded():
    a = states.haar_random_pure(3, 7)
    b = states.haar_random_pure(3, 7)
    c = states.haar_random_pure(3, [7, 1])
    assert_allclose(a.amplitudes, b.amplitudes)
    assert not np.allclose(a.amplitudes, c.amplitudes)


def test_haar_sampling_mean_overlap():
    # E|<0|psi>|^2 = 1/d for Haar states
    overlaps = [abs(states.haar_random_pure(2, [3, i]).amplitudes[0]) ** 2 for i in range(2000)]
    assert np.mean(overlaps) == pytest.approx(0.25, abs=0.02)


def test_random_rank_deficient_rank():
    rho = states.random_rank_deficient(2, 1, 11)
    values = np.linalg.eigvalsh(rho.matrix)
    assert np.sum(values > 1e-10) == 2


def test_state_file_round_trip(tmp_path, w3):
    path = tmp_path / "w3.json"
    states.save_state(w3, path)
    loaded = states.load_state(path)
    assert_allclose(loaded.amplitudes, w3.amplitudes, rtol=0, atol=0)

    rho = states.isotropic_mixture(0.3, w3)
    states.save_state(rho, path)
    assert_allclose(states.load_state(path).matrix, rho.matrix, rtol=0, atol=0)


def test_state_file_is_deterministic(w3):
    assert states.dumps_state(w3) == states.dumps_state(states.loads_state(states.dumps_state(w3)))


def test_parse_errors():
    with pytest.raises(ParseError) as err:
        states.loads_state('{"kind": "pure",\n "n_qubits": }')
    assert err.value.line == 2
    with pytest.raises(ParseError) as err:
        states.loads_state('{"kind": "pure", "n_qubits": 1, "amplitudes": [[1, 0]]}')
    assert err.value.field == "amplitudes"
    with pytest.raises(ParseError) as err:
        states.loads_state('{"kind": "qutrit", "n_qubits": 1}')
    assert err.value.field == "kind"


def test_load_missing_file(tmp_path):
    with pytest.raises(ParseError):
        states.load_state(tmp_path / "missing.json")


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_non_finite_entries_rejected(bad):
    with pytest.raises(InvariantViolation):
        PureState(n_qubits=2, amplitudes=[bad, 0, 0, 0])
    matrix = np.eye(4) / 4
    matrix[1, 1] = bad
    with pytest.raises(InvariantViolation):
        DensityMatrix(n_qubits=2, matrix=matrix)


def test_nan_in_state_file_rejected():
    with pytest.raises(InvariantViolation):
        states.loads_state('{"kind": "pure", "n_qubits": 1, "amplitudes": [[NaN, 0], [0, 0]]}')
