"""
Dense complex linear algebra for qubit registers up to 2^6 dimensions.

Matrices are plain numpy complex128 arrays in row-major order. Qubit 0 is
the most significant bit of a basis index throughout the toolkit.
"""
import logging
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, model_validator

import config
from errors import BadIndex, NoConvergence, NotHermitian, NotPSD, WrongDimension

logger = logging.getLogger(__name__)

CMatrix = npt.NDArray[np.complex128]

MAX_DIM = 64

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)


class EigenDecomposition(BaseModel):
    """Descending real eigenvalues with orthonormal eigenvector columns."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    vectors: np.ndarray

    @model_validator(mode="after")
    def _shapes(self):
        n = self.values.shape[0]
        if self.vectors.shape != (n, n):
            raise WrongDimension(f"eigenvector block {self.vectors.shape} does not match {n} values")
        self.values.setflags(write=False)
        self.vectors.setflags(write=False)
        return self

    def reconstruct(self) -> CMatrix:
        return (self.vectors * self.values) @ self.vectors.conj().T


# ─────────────────────────────────────────────
# HELPERS
# ─────────────────────────────────────────────
def as_matrix(m) -> CMatrix:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise WrongDimension(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise WrongDimension("empty matrix")
    return a


def identity(dim: int) -> CMatrix:
    return np.eye(dim, dtype=np.complex128)


def qubit_count(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim <= 0 or (1 << n) != dim:
        raise WrongDimension(f"dimension {dim} is not a power of two")
    return n


def hermitian_error(m: CMatrix) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def _off_norm(a: CMatrix) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


# ─────────────────────────────────────────────
# EIGENSOLVER: cyclic complex Jacobi
# ─────────────────────────────────────────────
def hermitian_eig(m, tol: float = config.JACOBI_TOL,
                  max_sweeps: int = config.JACOBI_MAX_SWEEPS) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix with cyclic 2x2 complex Jacobi rotations.

    Each rotation first removes the phase of a[p, q] with a diagonal unitary
    and then applies the real symmetric Jacobi rotation, so the combined
    2x2 block is G = diag(1, e^{-i phi}) R.
    """
    a = as_matrix(m)
    dim = a.shape[0]
    if dim > MAX_DIM:
        raise WrongDimension(f"dimension {dim} exceeds {MAX_DIM}")
    err = hermitian_error(a)
    if err > config.HERMITIAN_TOL:
        raise NotHermitian(f"max |m - m^H| = {err:.3e} exceeds {config.HERMITIAN_TOL}")

    a = (a + a.conj().T) / 2
    v = identity(dim)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    converged = False
    sweeps = 0
    for sweeps in range(max_sweeps):
        if _off_norm(a) < threshold:
            converged = True
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = a[p, q]
                b = abs(apq)
                if b == 0.0:
                    continue
                phase = np.conj(apq / b)
                tau = (a[q, q].real - a[p, p].real) / (2.0 * b)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    else:
        converged = _off_norm(a) < threshold

    if not converged:
        raise NoConvergence(f"off-diagonal norm {_off_norm(a):.3e} after {max_sweeps} sweeps")
    logger.debug(f"[Jacobi] dim={dim} converged in {sweeps} sweeps")

    values = np.real(np.diag(a)).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=v[:, order].copy())


def eigvalsh(m) -> np.ndarray:
    return hermitian_eig(m).values


def clamp_psd(values: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Zero out rounding-level eigenvalues; reject genuinely negative ones."""
    lowest = float(values.min())
    if lowest < -config.PSD_CLAMP:
        raise NotPSD(f"{what} has eigenvalue {lowest:.3e} below -{config.PSD_CLAMP}")
    return np.where(values < config.ZERO_FLOOR, 0.0, values)


def matrix_sqrt_psd(m) -> CMatrix:
    eig = hermitian_eig(m)
    roots = np.sqrt(clamp_psd(eig.values))
    return (eig.vectors * roots) @ eig.vectors.conj().T


# ─────────────────────────────────────────────
# TENSOR STRUCTURE
# ─────────────────────────────────────────────
def tensor(a, b) -> CMatrix:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def _check_keep(keep: Iterable[int], n: int) -> list[int]:
    if isinstance(keep, (set, frozenset)):
        keep = sorted(keep)
    keep = [int(k) for k in keep]
    if not keep:
        raise BadIndex("keep set is empty")
    bad = [k for k in keep if k < 0 or k >= n]
    if bad:
        raise BadIndex(f"qubit indices {bad} out of range for {n} qubits")
    if len(set(keep)) != len(keep):
        raise BadIndex(f"duplicate qubit indices in {keep}")
    return keep


def partial_trace(m, keep: Iterable[int]) -> CMatrix:
    """Reduced matrix on the qubits in `keep`, ordered as given (sets are sorted)."""
    a = as_matrix(m)
    n = qubit_count(a.shape[0])
    keep = _check_keep(keep, n)

    t = a.reshape([2] * (2 * n))
    current = n
    for q in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=q, axis2=q + current)
        current -= 1

    remaining = sorted(keep)
    perm = [remaining.index(k) for k in keep]
    t = t.transpose(perm + [p + current for p in perm])
    size = 1 << current
    return t.reshape(size, size)


def reduce_pure(amplitudes: Sequence[complex], keep: Iterable[int]) -> CMatrix:
    """Reduced matrix of a pure state without forming the full projector."""
    psi = np.asarray(amplitudes, dtype=np.complex128)
    n = qubit_count(psi.shape[0])
    keep = _check_keep(keep, n)
    rest = [q for q in range(n) if q not in keep]
    block = psi.reshape([2] * n).transpose(keep + rest).reshape(1 << len(keep), -1)
    return block @ block.conj().T
