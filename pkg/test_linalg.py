import numpy as np
import pytest
from numpy.testing import assert_allclose

import linalg
from errors import BadIndex, NotHermitian, NotPSD, WrongDimension


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def random_density(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("dim", [1, 2, 4, 8, 16])
def test_jacobi_matches_numpy(dim):
    m = random_hermitian(dim, seed=dim)
    eig = linalg.hermitian_eig(m)
    assert_allclose(eig.values, np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-10)
    assert_allclose(eig.reconstruct(), m, atol=1e-10)
    assert_allclose(eig.vectors.conj().T @ eig.vectors, np.eye(dim), atol=1e-10)


def test_jacobi_diagonal_input_is_sorted_descending():
    eig = linalg.hermitian_eig(np.diag([0.1, 0.7, 0.2]))
    assert_allclose(eig.values, [0.7, 0.2, 0.1])


def test_jacobi_complex_phases():
    m = np.array([[1.0, 1j], [-1j, 1.0]])
    eig = linalg.hermitian_eig(m)
    assert_allclose(eig.values, [2.0, 0.0], atol=1e-12)
    assert_allclose(eig.reconstruct(), m, atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        linalg.hermitian_eig(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_non_square_rejected():
    with pytest.raises(WrongDimension):
        linalg.as_matrix(np.zeros((2, 3)))


def test_clamp_psd():
    assert_allclose(linalg.clamp_psd(np.array([0.5, -1e-12, 1e-17])), [0.5, 0.0, 0.0])
    with pytest.raises(NotPSD):
        linalg.clamp_psd(np.array([0.5, -1e-6]))


def test_matrix_sqrt_squares_back():
    rho = random_density(4, seed=3)
    root = linalg.matrix_sqrt_psd(rho)
    assert_allclose(root @ root, rho, atol=1e-10)


def test_partial_trace_of_product():
    a = random_density(2, seed=1)
    b = random_density(4, seed=2)
    ab = linalg.tensor(a, b)
    assert_allclose(linalg.partial_trace(ab, [0]), a, atol=1e-12)
    assert_allclose(linalg.partial_trace(ab, [1, 2]), b, atol=1e-12)
    assert_allclose(linalg.partial_trace(ab, {2, 1}), b, atol=1e-12)


def test_partial_trace_keeps_requested_order():
    a = random_density(2, seed=4)
    b = random_density(2, seed=5)
    assert_allclose(linalg.partial_trace(linalg.tensor(a, b), [1, 0]), linalg.tensor(b, a), atol=1e-12)


def test_partial_trace_preserves_trace():
    rho = random_density(8, seed=6)
    for keep in ([0], [1], [2], [0, 2], [2, 0, 1]):
        assert abs(np.trace(linalg.partial_trace(rho, keep)) - 1.0) < 1e-12


@pytest.mark.parametrize("keep", [[], [0, 0], [3], [-1]])
def test_partial_trace_bad_indices(keep):
    with pytest.raises(BadIndex):
        linalg.partial_trace(np.eye(8) / 8, keep)


def test_partial_trace_needs_qubit_dimension():
    with pytest.raises(WrongDimension):
        linalg.partial_trace(np.eye(3) / 3, [0])


def test_reduce_pure_matches_projector_trace():
    rng = np.random.default_rng(7)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    full = np.outer(psi, psi.conj())
    for keep in ([0], [1, 2], [2, 0]):
        assert_allclose(linalg.reduce_pure(psi, keep), linalg.partial_trace(full, keep), atol=1e-12)
