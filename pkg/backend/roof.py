"""
Numerical convex roof (minimum) and roof of assistance (maximum) over
pure-state decompositions.

Every size-m decomposition of a rank-r state rho = sum_i mu_i |v_i><v_i|
is |psi~_j> = sum_i U_ji sqrt(mu_i) |v_i> for an m x r isometry U. U is
searched by projected gradient descent on the set of isometries (polar
retraction, Armijo steps) from Haar-random starts. Each restart may spend
at most `evals_per_param` objective evaluations per real parameter of U.

The unnormalized row |x> contributes ||x||^2 M(x/||x||). For concurrence
that is sqrt(2(||x||^4 - Tr rho_A(x)^2)), smoothed by SMOOTHING * ||x||^2
so the gradient exists at product rows; reported values are recomputed
without smoothing.

Minimization returns an upper bound on the true roof and maximization a
lower bound on the assisted value.
"""
import hashlib
import logging
import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

import config
import linalg
from errors import BadParameter, InvariantViolation, RankTooHigh, WrongDimension
from states import PartitionSpec, State, as_density

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
WEIGHT_FLOOR = 1e-14
SMOOTHING = 1e-6
ARMIJO = 1e-4
STEP_FLOOR = 1e-12


class RoofMeasure(str, Enum):
    CONCURRENCE = "concurrence"
    EOF = "eof"


class Direction(str, Enum):
    MIN = "min"
    MAX = "max"


class RestartBudget(BaseModel):
    model_config = ConfigDict(frozen=True)

    restarts: int = config.DEFAULT_RESTARTS
    size_factor: int = 2
    evals_per_param: int = config.ROOF_EVALS_PER_PARAM
    grad_tol: float = config.ROOF_GRAD_TOL
    agreement: float = config.ROOF_AGREEMENT
    early_stop: bool = True
    seed: int = 0

    @model_validator(mode="after")
    def _positive(self):
        if self.restarts < 1:
            raise BadParameter(f"restarts={self.restarts}, at least one is required")
        if self.size_factor < 1:
            raise BadParameter(f"size_factor={self.size_factor} must be at least 1")
        if self.evals_per_param < 1:
            raise BadParameter(f"evals_per_param={self.evals_per_param} must be at least 1")
        return self

    def max_evaluations(self, m: int, r: int) -> int:
        return self.evals_per_param * 2 * m * r


class Decomposition(BaseModel):
    """Weights p_j and normalized pure states |psi_j> (rows of `vectors`)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: np.ndarray
    vectors: np.ndarray

    @model_validator(mode="after")
    def _valid(self):
        if self.weights.ndim != 1 or self.vectors.shape[0] != self.weights.shape[0]:
            raise InvariantViolation("one weight per decomposition vector expected")
        if np.any(self.weights < 0) or abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise InvariantViolation("decomposition weights must be a probability vector")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise InvariantViolation("decomposition vectors must be normalized")
        return self

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def reconstruct(self) -> linalg.CMatrix:
        return np.einsum('j,ja,jb->ab', self.weights, self.vectors, self.vectors.conj())


class RoofResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    best: Decomposition
    restarts_used: int
    converged: bool
    evaluations: int = 0
    restart_values: tuple[float, ...] = ()


# ─────────────────────────────────────────────
# PURE-STATE MEASURES, VECTORIZED OVER ROWS
# ─────────────────────────────────────────────
def pure_measures(vectors: np.ndarray, n_qubits: int, focus: int, kind: RoofMeasure) -> np.ndarray:
    """Measure of each normalized row across the cut focus | rest."""
    k = vectors.shape[0]
    t = vectors.reshape((k,) + (2,) * n_qubits)
    t = np.moveaxis(t, 1 + focus, 1).reshape(k, 2, -1)
    rho_a = np.einsum('kai,kbi->kab', t, t.conj())
    tr_sq = np.real(np.einsum('kab,kba->k', rho_a, rho_a))
    c = np.sqrt(np.clip(2.0 * (1.0 - tr_sq), 0.0, 1.0))
    if kind is RoofMeasure.CONCURRENCE:
        return c
    return np.clip(_entropy_of_concurrence(c), 0.0, 1.0)


def _entropy_of_concurrence(c: np.ndarray) -> np.ndarray:
    x = (1.0 + np.sqrt(np.clip(1.0 - c * c, 0.0, 1.0))) / 2.0
    y = 1.0 - x
    with np.errstate(divide='ignore', invalid='ignore'):
        return -x * np.log2(x) - np.where(y > 0, y * np.log2(np.where(y > 0, y, 1.0)), 0.0)


def _split(psi_tilde: np.ndarray):
    weights = np.sum(np.abs(psi_tilde) ** 2, axis=1)
    keep = weights > WEIGHT_FLOOR
    vectors = psi_tilde[keep] / np.sqrt(weights[keep])[:, None]
    return weights[keep], vectors


def _state_seed(matrix: np.ndarray, kind: RoofMeasure, direction: Direction, extra: int) -> int:
    canonical = (np.round(matrix, 12) + 0.0).astype(np.complex128)
    h = hashlib.blake2b(digest_size=8)
    h.update(canonical.tobytes())
    h.update(f"{kind.value}|{direction.value}|{extra}".encode())
    return int.from_bytes(h.digest(), "little")


# ─────────────────────────────────────────────
# SMOOTHED OBJECTIVE AND ITS GRADIENT
# ─────────────────────────────────────────────
def row_objective(x: np.ndarray, n_qubits: int, focus: int, kind: RoofMeasure,
                  want_grad: bool = True):
    """Sum over unnormalized rows x_j of ||x_j||^2 M(x_j / ||x_j||), smoothed.

    The gradient is d/d(conj x), one row per decomposition element.
    """
    m = x.shape[0]
    xs = np.moveaxis(x.reshape((m,) + (2,) * n_qubits), 1 + focus, 1).reshape(m, 2, -1)
    w = np.real(np.einsum('kai,kai->k', xs, xs.conj()))
    rho_a = np.einsum('kai,kbi->kab', xs, xs.conj())
    purity = np.real(np.einsum('kab,kba->k', rho_a, rho_a))
    live = w > WEIGHT_FLOOR
    w_safe = np.where(live, w, 1.0)
    c_tilde = np.sqrt(np.clip(2.0 * (w * w - purity), 0.0, None) + (SMOOTHING * w) ** 2)

    if kind is RoofMeasure.CONCURRENCE:
        total = float(np.sum(np.where(live, c_tilde, 0.0)))
    else:
        c = np.clip(c_tilde / w_safe, 0.0, 1.0)
        ent = _entropy_of_concurrence(c)
        total = float(np.sum(np.where(live, w * ent, 0.0)))
    if not want_grad:
        return total, None

    wx = w[:, None, None] * xs
    d_c_tilde = ((2.0 * (wx - rho_a @ xs) + SMOOTHING ** 2 * wx)
                 / np.where(live, c_tilde, 1.0)[:, None, None])
    if kind is RoofMeasure.CONCURRENCE:
        grad = d_c_tilde
    else:
        # dE/dC = C artanh(y) / (y ln 2) with y = sqrt(1 - C^2)
        y = np.clip(np.sqrt(np.clip(1.0 - c * c, 0.0, 1.0)), 1e-12, 1.0 - 1e-15)
        slope = c * np.arctanh(y) / (y * math.log(2.0))
        grad = ent[:, None, None] * xs + slope[:, None, None] * (d_c_tilde - c[:, None, None] * xs)
    grad = np.where(live[:, None, None], grad, 0.0)
    grad = np.moveaxis(grad.reshape((m,) + (2,) * n_qubits), 1, 1 + focus).reshape(m, -1)
    return total, grad


def haar_isometry(m: int, r: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))) / math.sqrt(2.0)
    q, upper = np.linalg.qr(z)
    phases = np.diag(upper) / np.abs(np.diag(upper))
    return q * phases


def _retract(u: np.ndarray) -> np.ndarray:
    left, _, right = np.linalg.svd(u, full_matrices=False)
    return left @ right


# ─────────────────────────────────────────────
# OPTIMIZER
# ─────────────────────────────────────────────
def _descend(objective, u: np.ndarray, max_evals: int, grad_tol: float):
    """Projected gradient descent with Armijo backtracking; returns (value, u, evaluations)."""
    value, grad = objective(u, True)
    evals = 1
    step = 1.0
    while evals < max_evals:
        a = u.conj().T @ grad
        tangent = grad - u @ ((a + a.conj().T) / 2.0)
        norm_sq = float(np.real(np.vdot(tangent, tangent)))
        if norm_sq < grad_tol ** 2:
            break
        accepted = False
        while evals < max_evals and step >= STEP_FLOOR:
            trial = _retract(u - step * tangent)
            trial_value, _ = objective(trial, False)
            evals += 1
            if trial_value <= value - ARMIJO * step * norm_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        u = trial
        previous = value
        value, grad = objective(u, True)
        evals += 1
        step = min(2.0 * step, 1e3)
        if previous - value <= 1e-14 * max(1.0, abs(value)):
            break
    return value, u, evals


def roof_optimize(rho: State, part: Optional[PartitionSpec] = None,
                  kind: RoofMeasure = RoofMeasure.CONCURRENCE,
                  direction: Direction = Direction.MIN,
                  budget: Optional[RestartBudget] = None) -> RoofResult:
    rho = as_density(rho)
    kind, direction = RoofMeasure(kind), Direction(direction)
    budget = budget or RestartBudget()
    part = (part or PartitionSpec.default(rho.n_qubits)).check(rho.n_qubits)
    n = rho.n_qubits

    eig = linalg.hermitian_eig(rho.matrix)
    mu = linalg.clamp_psd(eig.values, what="density matrix")
    r = int(np.sum(mu > RANK_TOL))
    if r > config.ROOF_MAX_RANK:
        raise RankTooHigh(f"rank {r} exceeds {config.ROOF_MAX_RANK}")
    base = (eig.vectors[:, :r] * np.sqrt(mu[:r])).T

    def evaluate(psi_tilde: np.ndarray):
        weights, vectors = _split(psi_tilde)
        values = pure_measures(vectors, n, part.focus, kind)
        return float(weights @ values), weights, vectors

    if r == 1:
        value, weights, vectors = evaluate(base)
        best = Decomposition(weights=weights / weights.sum(), vectors=vectors)
        return RoofResult(value=value, best=best, restarts_used=0, converged=True,
                          restart_values=(value,))

    m = budget.size_factor * r
    sign = 1.0 if direction is Direction.MIN else -1.0
    base_h = base.conj().T

    def objective(u: np.ndarray, want_grad: bool):
        total, grad_x = row_objective(u @ base, n, part.focus, kind, want_grad)
        if grad_x is None:
            return sign * total, None
        return sign * total, sign * (grad_x @ base_h)

    rng = np.random.default_rng(_state_seed(rho.matrix, kind, direction, budget.seed))
    max_evals = budget.max_evaluations(m, r)
    restart_values: list[float] = []
    evaluations = 0
    best_value, best_u = math.inf, None
    for restart in range(budget.restarts):
        _, u, used = _descend(objective, haar_isometry(m, r, rng), max_evals, budget.grad_tol)
        evaluations += used
        exact = evaluate(u @ base)[0]
        restart_values.append(exact)
        if sign * exact < best_value:
            best_value, best_u = sign * exact, u
        last = restart_values[-3:]
        if (budget.early_stop and len(last) == 3
                and all(abs(v - sign * best_value) <= budget.agreement for v in last)):
            break

    last = restart_values[-3:]
    converged = len(last) == 3 and max(last) - min(last) <= budget.agreement
    value, weights, vectors = evaluate(best_u @ base)
    best = Decomposition(weights=weights / weights.sum(), vectors=vectors)
    if not converged:
        logger.warning(f"[Roof] {kind.value}/{direction.value} not converged after "
                       f"{len(restart_values)} restarts (spread {max(last) - min(last):.2e})")
    logger.debug(f"[Roof] {kind.value}/{direction.value} rank={r} m={m} value={value:.8f} "
                 f"restarts={len(restart_values)} evaluations={evaluations}")
    return RoofResult(value=value, best=best, restarts_used=len(restart_values),
                      converged=converged, evaluations=evaluations,
                      restart_values=tuple(restart_values))


def eoa(rho: State, budget: Optional[RestartBudget] = None) -> float:
    """Entanglement of assistance of a two-qubit state (a lower bound, numerically)."""
    rho = as_density(rho)
    if rho.n_qubits != 2:
        raise WrongDimension(f"entanglement of assistance needs two qubits, got {rho.n_qubits}")
    return roof_optimize(rho, PartitionSpec.default(2), RoofMeasure.EOF, Direction.MAX, budget).value
