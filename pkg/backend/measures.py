"""
Closed-form entanglement measures on qubit bipartitions.

Two-qubit mixed states use the Wootters spectrum: lambda_i are square roots
of the eigenvalues of rho * rho~, taken here from the Hermitian product
sqrt(rho) rho~ sqrt(rho). EoF of a two-qubit state is
h((1 + sqrt(1 - C^2)) / 2).
"""
import logging
import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

import config
import linalg
import roof
from errors import DomainError, InvariantViolation, UnsupportedGlobalMeasure, WrongDimension
from states import (DensityMatrix, PartitionSpec, PureState, State, dominant_vector,
                    is_pure, partial_trace)

logger = logging.getLogger(__name__)


class MeasureKind(str, Enum):
    CONCURRENCE = "concurrence"
    COA = "coa"
    EOF = "eof"


class MeasureVector(BaseModel):
    """Pairwise values M(rho_AB_i) plus the global value M(rho_A|B_1...B_{n-1})."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    global_value: Optional[float] = Field(default=None, alias="global")
    pairs: tuple[float, ...]
    measure_kind: MeasureKind
    focus: int = 0
    partners: tuple[int, ...] = ()
    approximate: bool = False

    @model_validator(mode="after")
    def _ranges(self):
        values = list(self.pairs) + ([self.global_value] if self.global_value is not None else [])
        for v in values:
            if not math.isfinite(v) or v < 0:
                raise InvariantViolation(f"measure value {v} is not finite and non-negative")
        if any(v > 1.0 + config.SLACK for v in self.pairs):
            raise InvariantViolation(f"pair values {self.pairs} exceed 1")
        if (self.global_value is not None and self.measure_kind is MeasureKind.CONCURRENCE
                and self.global_value > 1.0 + config.SLACK):
            raise InvariantViolation(f"qubit-A concurrence {self.global_value} exceeds 1")
        if self.partners and len(self.partners) != len(self.pairs):
            raise InvariantViolation("one pair value per partner expected")
        return self


# ─────────────────────────────────────────────
# PURE STATES
# ─────────────────────────────────────────────
def _focus_reduced(state: PureState, part: Optional[PartitionSpec]) -> np.ndarray:
    part = (part or PartitionSpec.default(state.n_qubits)).check(state.n_qubits)
    return linalg.reduce_pure(state.amplitudes, [part.focus])


def concurrence_pure(state: PureState, part: Optional[PartitionSpec] = None) -> float:
    """sqrt(2 (1 - Tr rho_A^2)) for the focus qubit A."""
    rho_a = _focus_reduced(state, part)
    tr_sq = float(np.real(np.trace(rho_a @ rho_a)))
    return min(1.0, math.sqrt(max(0.0, 2.0 * (1.0 - tr_sq))))


def eof_pure(state: PureState, part: Optional[PartitionSpec] = None) -> float:
    rho_a = _focus_reduced(state, part)
    return von_neumann_entropy(DensityMatrix(n_qubits=1, matrix=(rho_a + rho_a.conj().T) / 2))


# ─────────────────────────────────────────────
# TWO-QUBIT MIXED STATES
# ─────────────────────────────────────────────
def _two_qubit_matrix(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else linalg.as_matrix(rho)
    if m.shape != (4, 4):
        raise WrongDimension(f"expected a two-qubit density matrix, got shape {m.shape}")
    return m


def spin_flip(rho) -> linalg.CMatrix:
    """(sigma_y x sigma_y) rho* (sigma_y x sigma_y)."""
    m = _two_qubit_matrix(rho)
    return linalg.SIGMA_YY @ m.conj() @ linalg.SIGMA_YY


def wootters_lambdas(rho) -> np.ndarray:
    m = _two_qubit_matrix(rho)
    root = linalg.matrix_sqrt_psd(m)
    r = root @ spin_flip(m) @ root
    r = (r + r.conj().T) / 2
    values = linalg.clamp_psd(linalg.eigvalsh(r), what="sqrt(rho) rho~ sqrt(rho)")
    return np.sort(np.sqrt(values))[::-1]


def concurrence_margin(rho) -> float:
    """lambda_1 - lambda_2 - lambda_3 - lambda_4, negative for separable states."""
    lam = wootters_lambdas(rho)
    return float(lam[0] - lam[1:].sum())


def concurrence_mixed(rho) -> float:
    return max(0.0, concurrence_margin(rho))


def coa(rho) -> float:
    """Concurrence of assistance of a two-qubit reduced state: sum of all lambdas."""
    return float(wootters_lambdas(rho).sum())


def example1_pair_concurrence(t: float) -> float:
    """2t/3 - sqrt((3 - 2t - t^2)/3), the pair concurrence of the noisy W mixture."""
    value = 2.0 * t / 3.0 - math.sqrt(max(0.0, (3.0 - 2.0 * t - t * t) / 3.0))
    return max(0.0, value)


# ─────────────────────────────────────────────
# ENTROPIES
# ─────────────────────────────────────────────
def binary_entropy(x: float) -> float:
    if x < -1e-12 or x > 1.0 + 1e-12 or math.isnan(x):
        raise DomainError(f"binary entropy argument {x} outside [0, 1]")
    x = min(1.0, max(0.0, x))
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def von_neumann_entropy(rho: State) -> float:
    if isinstance(rho, PureState):
        return 0.0
    values = linalg.clamp_psd(linalg.eigvalsh(rho.matrix), what="density matrix")
    positive = values[values > 0]
    return float(max(0.0, -np.sum(positive * np.log2(positive))))


def eof_two_qubit(rho) -> float:
    c = min(1.0, concurrence_mixed(rho))
    return binary_entropy((1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / 2.0)


# ─────────────────────────────────────────────
# MEASURE VECTORS
# ─────────────────────────────────────────────
_PAIR_MEASURES = {
    MeasureKind.CONCURRENCE: concurrence_mixed,
    MeasureKind.COA: coa,
    MeasureKind.EOF: eof_two_qubit,
}


def _pure_global(state: PureState, part: PartitionSpec, kind: MeasureKind) -> float:
    # C and C_a coincide on pure states
    if kind is MeasureKind.EOF:
        return eof_pure(state, part)
    return concurrence_pure(state, part)


def measure_vector(state: State, part: Optional[PartitionSpec] = None,
                   kind: MeasureKind = MeasureKind.CONCURRENCE,
                   allow_roof: bool = config.ENABLE_ROOF_FALLBACK,
                   budget: Optional["roof.RestartBudget"] = None,
                   pairs_only: bool = False) -> MeasureVector:
    """Pair values from the reduced states rho_{A B_i}; global value from the pure-state
    formula, or from the roof optimizer for genuinely mixed inputs (flagged approximate)."""
    kind = MeasureKind(kind)
    part = (part or PartitionSpec.default(state.n_qubits)).check(state.n_qubits)
    pair_measure = _PAIR_MEASURES[kind]
    pairs = tuple(pair_measure(partial_trace(state, [part.focus, b])) for b in part.partners)

    global_value = None
    approximate = False
    if not pairs_only:
        if isinstance(state, PureState):
            global_value = _pure_global(state, part, kind)
        elif is_pure(state):
            global_value = _pure_global(dominant_vector(state), part, kind)
        elif not allow_roof:
            raise UnsupportedGlobalMeasure(
                f"global {kind.value} of a mixed {state.n_qubits}-qubit state needs the roof optimizer"
            )
        else:
            roof_kind = roof.RoofMeasure.EOF if kind is MeasureKind.EOF else roof.RoofMeasure.CONCURRENCE
            direction = roof.Direction.MAX if kind is MeasureKind.COA else roof.Direction.MIN
            result = roof.roof_optimize(state, part, roof_kind, direction, budget or roof.RestartBudget())
            global_value = result.value
            approximate = True
            logger.warning(f"[Measures] Global {kind.value} from roof optimizer "
                           f"(converged={result.converged}); value is approximate")

    return MeasureVector(global_value=global_value, pairs=pairs, measure_kind=kind,
                         focus=part.focus, partners=part.partners, approximate=approximate)
