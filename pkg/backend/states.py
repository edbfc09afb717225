"""
n-qubit pure and mixed states: construction, validation, sampling and file I/O.

Every constructor validates its output; nothing is trusted because it came
from inside the package.
"""
import json
import logging
import math
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

import config
import linalg
from errors import BadParameter, InvariantViolation, NotNormalized, ParseError

logger = logging.getLogger(__name__)

MAX_QUBITS = 5

Seed = Union[int, Sequence[int]]


# ─────────────────────────────────────────────
# DOMAIN TYPES
# ─────────────────────────────────────────────
class PureState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_qubits: int
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _to_array(cls, v):
        return np.array(v, dtype=np.complex128).reshape(-1)

    @model_validator(mode="after")
    def _invariants(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise InvariantViolation(f"n_qubits={self.n_qubits} outside 1..{MAX_QUBITS}")
        if self.amplitudes.shape[0] != 1 << self.n_qubits:
            raise InvariantViolation(
                f"{self.amplitudes.shape[0]} amplitudes for {self.n_qubits} qubits"
            )
        if not np.all(np.isfinite(self.amplitudes)):
            raise InvariantViolation("amplitudes must be finite")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > config.NORM_TOL:
            raise InvariantViolation(f"amplitude norm {norm:.12f} is not 1")
        self.amplitudes.setflags(write=False)
        return self

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def projector(self) -> linalg.CMatrix:
        return np.outer(self.amplitudes, self.amplitudes.conj())


class DensityMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_qubits: int
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _to_array(cls, v):
        return np.array(v, dtype=np.complex128)

    @model_validator(mode="after")
    def _invariants(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise InvariantViolation(f"n_qubits={self.n_qubits} outside 1..{MAX_QUBITS}")
        dim = 1 << self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise InvariantViolation(f"matrix shape {self.matrix.shape} for {self.n_qubits} qubits")
        if not np.all(np.isfinite(self.matrix)):
            raise InvariantViolation("matrix entries must be finite")
        err = linalg.hermitian_error(self.matrix)
        if err > config.HERMITIAN_TOL:
            raise InvariantViolation(f"matrix is not Hermitian (max deviation {err:.3e})")
        trace = complex(np.trace(self.matrix))
        if abs(trace - 1.0) > config.NORM_TOL:
            raise InvariantViolation(f"trace {trace.real:.12f} is not 1")
        lowest = float(linalg.eigvalsh(self.matrix).min())
        if lowest < -config.PSD_CLAMP:
            raise InvariantViolation(f"matrix has negative eigenvalue {lowest:.3e}")
        self.matrix.setflags(write=False)
        return self

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


class PartitionSpec(BaseModel):
    """Focus qubit A and its ordered partners B_1..B_{n-1}."""
    model_config = ConfigDict(frozen=True)

    focus: int
    partners: tuple[int, ...]

    @model_validator(mode="after")
    def _disjoint(self):
        if self.focus in self.partners:
            raise InvariantViolation(f"focus {self.focus} also listed as a partner")
        if len(set(self.partners)) != len(self.partners):
            raise InvariantViolation(f"duplicate partners in {self.partners}")
        if self.focus < 0 or any(p < 0 for p in self.partners):
            raise InvariantViolation("qubit indices must be non-negative")
        return self

    @classmethod
    def default(cls, n_qubits: int, focus: int = 0) -> "PartitionSpec":
        return cls(focus=focus, partners=tuple(q for q in range(n_qubits) if q != focus))

    @property
    def n_qubits(self) -> int:
        return len(self.partners) + 1

    def check(self, n_qubits: int) -> "PartitionSpec":
        if sorted((self.focus, *self.partners)) != list(range(n_qubits)):
            raise InvariantViolation(
                f"partition {self.focus}|{list(self.partners)} does not cover {n_qubits} qubits"
            )
        return self


State = Union[PureState, DensityMatrix]


# ─────────────────────────────────────────────
# CONSTRUCTORS
# ─────────────────────────────────────────────
def from_pure(state: PureState) -> DensityMatrix:
    return DensityMatrix(n_qubits=state.n_qubits, matrix=state.projector())


def as_density(state: State) -> DensityMatrix:
    return from_pure(state) if isinstance(state, PureState) else state


def purity(rho: State) -> float:
    if isinstance(rho, PureState):
        return 1.0
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def is_pure(rho: State, tol: float = config.NORM_TOL) -> bool:
    return purity(rho) >= 1.0 - tol


def dominant_vector(rho: DensityMatrix) -> PureState:
    """Pure state carried by a rank-one density matrix."""
    eig = linalg.hermitian_eig(rho.matrix)
    vec = eig.vectors[:, 0]
    return PureState(n_qubits=rho.n_qubits, amplitudes=vec / np.linalg.norm(vec))


def product_state(bits: Sequence[int]) -> PureState:
    n = len(bits)
    index = int("".join(str(int(b)) for b in bits), 2)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(n_qubits=n, amplitudes=amps)


def bell_state(kind: Literal["phi+", "phi-", "psi+", "psi-"] = "phi+") -> PureState:
    s = 1 / math.sqrt(2)
    amps = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    if kind not in amps:
        raise BadParameter(f"unknown Bell state {kind!r}")
    return PureState(n_qubits=2, amplitudes=amps[kind])


def w_class_state(a: float, b: Sequence[float]) -> PureState:
    """a|0...0> plus b[i] on the basis vector with a single 1 in slot i.

    One coefficient per qubit, so len(b) is the qubit count.
    """
    n = len(b)
    total = a * a + sum(x * x for x in b)
    if abs(total - 1.0) > config.NORM_TOL:
        raise NotNormalized(f"a^2 + sum b_i^2 = {total:.12f}, expected 1")
    if not 1 <= n <= MAX_QUBITS:
        raise BadParameter(f"{n} coefficients, expected 1..{MAX_QUBITS}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = a
    for i, coeff in enumerate(b):
        amps[1 << (n - 1 - i)] = coeff
    return PureState(n_qubits=n, amplitudes=amps)


def w_state(n_qubits: int = 3) -> PureState:
    return w_class_state(0.0, [1 / math.sqrt(n_qubits)] * n_qubits)


def example2_state() -> PureState:
    return w_class_state(
        1 / math.sqrt(10),
        [1 / math.sqrt(15), 1 / math.sqrt(10), math.sqrt(2 / 15), math.sqrt(3 / 5)],
    )


def isotropic_mixture(t: float, base: PureState) -> DensityMatrix:
    """(1 - t)/2^n * I + t |base><base|."""
    if not 0.0 <= t <= 1.0:
        raise BadParameter(f"mixing parameter t={t} outside [0, 1]")
    dim = base.dim
    matrix = (1.0 - t) / dim * linalg.identity(dim) + t * base.projector()
    return DensityMatrix(n_qubits=base.n_qubits, matrix=matrix)


def haar_random_pure(n_qubits: int, seed: Seed) -> PureState:
    """Normalized vector of i.i.d. standard complex Gaussians (numpy PCG64)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise BadParameter(f"n_qubits={n_qubits} outside 1..{MAX_QUBITS}")
    rng = np.random.default_rng(seed)
    dim = 1 << n_qubits
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(n_qubits=n_qubits, amplitudes=amps / np.linalg.norm(amps))


def random_rank_deficient(n_qubits: int, n_ancilla: int, seed: Seed) -> DensityMatrix:
    """Reduced state of a Haar-random purification; rank at most 2^n_ancilla."""
    if n_ancilla < 1:
        raise BadParameter("need at least one ancilla qubit")
    psi = haar_random_pure(n_qubits + n_ancilla, seed)
    return partial_trace(psi, range(n_qubits))


def partial_trace(state: State, keep) -> DensityMatrix:
    if isinstance(state, PureState):
        reduced = linalg.reduce_pure(state.amplitudes, keep)
    else:
        reduced = linalg.partial_trace(state.matrix, keep)
    reduced = (reduced + reduced.conj().T) / 2
    return DensityMatrix(n_qubits=linalg.qubit_count(reduced.shape[0]), matrix=reduced)


# ─────────────────────────────────────────────
# FILE I/O
# ─────────────────────────────────────────────
Pair = tuple[float, float]


class StateFile(BaseModel):
    """On-disk schema: {"kind", "n_qubits", "amplitudes" | "matrix"}, entries as [re, im]."""
    kind: Literal["pure", "mixed"]
    n_qubits: int
    amplitudes: Optional[list[Pair]] = None
    matrix: Optional[list[list[Pair]]] = None

    @model_validator(mode="after")
    def _payload(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ParseError(f"n_qubits={self.n_qubits} outside 1..{MAX_QUBITS}", field="n_qubits")
        dim = 1 << self.n_qubits
        if self.kind == "pure":
            if self.amplitudes is None:
                raise ParseError("pure state needs 'amplitudes'", field="amplitudes")
            if len(self.amplitudes) != dim:
                raise ParseError(f"expected {dim} amplitudes, got {len(self.amplitudes)}",
                                 field="amplitudes")
        else:
            if self.matrix is None:
                raise ParseError("mixed state needs 'matrix'", field="matrix")
            if len(self.matrix) != dim:
                raise ParseError(f"expected {dim} rows, got {len(self.matrix)}", field="matrix")
            for i, row in enumerate(self.matrix):
                if len(row) != dim:
                    raise ParseError(f"row {i} has {len(row)} entries, expected {dim}",
                                     field=f"matrix.{i}")
        return self

    def to_state(self) -> State:
        if self.kind == "pure":
            amps = [complex(re, im) for re, im in self.amplitudes]
            return PureState(n_qubits=self.n_qubits, amplitudes=amps)
        rows = [[complex(re, im) for re, im in row] for row in self.matrix]
        return DensityMatrix(n_qubits=self.n_qubits, matrix=rows)

    @classmethod
    def from_state(cls, state: State) -> "StateFile":
        if isinstance(state, PureState):
            return cls(kind="pure", n_qubits=state.n_qubits,
                       amplitudes=[(z.real, z.imag) for z in state.amplitudes])
        return cls(kind="mixed", n_qubits=state.n_qubits,
                   matrix=[[(z.real, z.imag) for z in row] for row in state.matrix])


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _pair(p: Pair) -> str:
    return f"[{format_float(p[0])}, {format_float(p[1])}]"


def dumps_state(state: State) -> str:
    doc = StateFile.from_state(state)
    lines = ["{", f'  "kind": "{doc.kind}",', f'  "n_qubits": {doc.n_qubits},']
    if doc.kind == "pure":
        body = ",\n    ".join(_pair(p) for p in doc.amplitudes)
        lines.append(f'  "amplitudes": [\n    {body}\n  ]')
    else:
        rows = ",\n    ".join("[" + ", ".join(_pair(p) for p in row) + "]" for row in doc.matrix)
        lines.append(f'  "matrix": [\n    {rows}\n  ]')
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_state(text: str) -> State:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno) from e
    try:
        doc = StateFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        raise ParseError(first["msg"], field=field) from e
    return doc.to_state()


def save_state(state: State, path) -> None:
    Path(path).write_text(dumps_state(state), encoding="utf-8")
    logger.info(f"[States] Saved {type(state).__name__} ({state.n_qubits} qubits) to {path}")


def load_state(path) -> State:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from e
    state = loads_state(text)
    logger.info(f"[States] Loaded {type(state).__name__} ({state.n_qubits} qubits) from {path}")
    return state
