"""
Exponent thresholds for polygamy and monogamy of C^alpha and E^alpha.

f(alpha) = sum_i M(rho_AB_i)^alpha over entangled pairs,
g(alpha) = f(alpha) - M(rho_A|B...)^alpha.

alpha0 solves f = 1, alpha1 is the leftmost zero of g on [alpha0, cap],
beta0 solves the alpha0 equation for the assisted inequalities. The cap is
2 for concurrence and sqrt(2) for entanglement of formation. Pairs with
M <= ENTANGLED_TOL never enter f, so no 0^0 convention is needed.
"""
import logging
import math
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

import config
import measures
import roof
from errors import (BadParameter, DegenerateGlobal, DomainError, HypothesisNotMet,
                    InvariantViolation, NoSignChange)
from measures import MeasureKind, MeasureVector
from states import PartitionSpec, PureState, partial_trace

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
# noisy-W pair becomes entangled above the positive root of 7t^2 + 6t - 9
EXAMPLE1_T_STAR = (-3.0 + 6.0 * SQRT2) / 7.0


class ThresholdKind(str, Enum):
    ALPHA0_C = "alpha0_c"
    ALPHA0_E = "alpha0_e"
    ALPHA1_C = "alpha1_c"
    ALPHA1_E = "alpha1_e"
    BETA0 = "beta0"


class ThresholdResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    threshold: float
    bracket: tuple[float, float]
    residual: float
    iterations: int
    kind: ThresholdKind
    saturated: bool = False
    sign_changes: Optional[int] = None
    certified: Optional[bool] = None

    @model_validator(mode="after")
    def _residual(self):
        if not self.saturated and self.residual > 1e-10:
            raise InvariantViolation(f"{self.kind.value} residual {self.residual:.3e} above 1e-10")
        return self


class Case(str, Enum):
    NO_ENTANGLED_PAIR = "no_entangled_pair"
    ONE_PAIR = "one_pair"
    TWO_OR_MORE_PAIRS = "two_or_more_pairs"
    ALL_PAIRS = "all_pairs"


class CaseClassification(BaseModel):
    model_config = ConfigDict(frozen=True)

    entangled_pairs: tuple[int, ...]
    case: Case


class Relation(str, Enum):
    MONOGAMY_GE = "monogamy_ge"
    POLYGAMY_LE = "polygamy_le"
    POLYGAMY_LT = "polygamy_lt"


class InequalityPoint(BaseModel):
    alpha: float
    lhs: float
    rhs: float
    relation: Relation
    holds: bool


class InequalityReport(BaseModel):
    measure_kind: MeasureKind
    case: Case
    points: tuple[InequalityPoint, ...]
    passed: bool
    failures: int


class CoaPolygamyReport(BaseModel):
    lhs_squared: float
    rhs_squared: float
    squared_holds: bool
    beta0: Optional[float] = None
    beta_region: Optional[InequalityReport] = None
    passed: bool


class WeightedPolygamyReport(BaseModel):
    beta: float
    beta0: Optional[float]
    beta_in_range: bool
    lhs: float
    plain_rhs: float
    weighted_rhs: float
    plain_holds: bool
    weighted_holds: bool
    condition_met: bool
    weighted_applicable: bool
    eoa_pairs: tuple[float, ...]
    notes: tuple[str, ...] = ()


# ─────────────────────────────────────────────
# f AND g
# ─────────────────────────────────────────────
def entangled_values(mv: MeasureVector, tol: Optional[float] = None) -> np.ndarray:
    tol = config.ENTANGLED_TOL if tol is None else tol
    values = np.asarray(mv.pairs, dtype=float)
    return values[values > tol]


def f_of_alpha(mv: MeasureVector, alpha: float, tol: Optional[float] = None) -> float:
    return float(np.sum(entangled_values(mv, tol) ** alpha))


def power(x: float, alpha: float) -> float:
    """x^alpha with 0^0 = 1 and 0^(negative) = inf."""
    if x > 0:
        return x ** alpha
    if alpha > 0:
        return 0.0
    return 1.0 if alpha == 0 else math.inf


def g_of_alpha(mv: MeasureVector, alpha: float, tol: Optional[float] = None) -> float:
    tol = config.ENTANGLED_TOL if tol is None else tol
    if mv.global_value is None or mv.global_value <= tol:
        raise DegenerateGlobal(f"global value {mv.global_value} is not positive")
    return f_of_alpha(mv, alpha, tol) - mv.global_value ** alpha


def cap_for(kind: MeasureKind) -> float:
    return SQRT2 if MeasureKind(kind) is MeasureKind.EOF else 2.0


def alpha_grid(start: float, stop: float, step: Optional[float] = None,
               n: Optional[int] = None) -> np.ndarray:
    """Inclusive grid; with `step`, `stop` is appended when it is off-grid."""
    if n is not None:
        return np.linspace(start, stop, n)
    if step is None or step <= 0:
        raise BadParameter(f"grid step {step} must be positive")
    count = int(math.floor((stop - start) / step + 1e-9))
    grid = np.round(start + step * np.arange(count + 1), 12)
    if grid[-1] < stop - 1e-12:
        grid = np.append(grid, stop)
    return grid


# ─────────────────────────────────────────────
# ROOT FINDING
# ─────────────────────────────────────────────
def _bisect(func: Callable[[float], float], lo: float, hi: float, positive_at_lo: bool,
            tol: float = config.BISECTION_TOL, max_iter: int = config.BISECTION_MAX_ITER):
    """Bisection on a bracket where func changes sign; returns (x, iterations, bracket)."""
    iterations = 0
    mid = 0.5 * (lo + hi)
    while iterations < max_iter:
        mid = 0.5 * (lo + hi)
        value = func(mid)
        iterations += 1
        if abs(value) <= tol or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(hi)):
            break
        if (value > 0) == positive_at_lo:
            lo = mid
        else:
            hi = mid
    return mid, iterations, (lo, hi)


def _solve_pair_sum(mv: MeasureVector, kind: ThresholdKind) -> ThresholdResult:
    values = entangled_values(mv)
    if values.shape[0] < 2:
        raise HypothesisNotMet(f"{values.shape[0]} entangled pair(s); at least two are required")
    cap = cap_for(mv.measure_kind)

    def excess(alpha: float) -> float:
        return float(np.sum(values ** alpha)) - 1.0

    at_cap = excess(cap)
    if at_cap > config.BISECTION_TOL:
        logger.warning(f"[Threshold] f(cap) = {at_cap + 1:.6f} > 1; reporting {kind.value} = cap (saturated)")
        return ThresholdResult(threshold=cap, bracket=(cap, cap), residual=abs(at_cap),
                               iterations=0, kind=kind, saturated=True)
    if abs(at_cap) <= config.BISECTION_TOL:
        return ThresholdResult(threshold=cap, bracket=(cap, cap), residual=abs(at_cap),
                               iterations=0, kind=kind)

    root, iterations, bracket = _bisect(excess, 0.0, cap, positive_at_lo=True)
    logger.debug(f"[Threshold] {kind.value} = {root:.12f} after {iterations} iterations")
    return ThresholdResult(threshold=root, bracket=bracket, residual=abs(excess(root)),
                           iterations=iterations, kind=kind)


def find_alpha0(mv: MeasureVector) -> ThresholdResult:
    kind = ThresholdKind.ALPHA0_E if mv.measure_kind is MeasureKind.EOF else ThresholdKind.ALPHA0_C
    return _solve_pair_sum(mv, kind)


def find_beta0(pair_mv: MeasureVector, assist_mv: Optional[MeasureVector] = None) -> ThresholdResult:
    """Root of sum_i M(rho_AB_i)^beta0 = 1 on the non-assisted pairs.

    With the assisted pair values at hand, also records whether they keep the
    assisted sum at or above 1 at beta0 (they must, since M <= M_a).
    """
    result = _solve_pair_sum(pair_mv, ThresholdKind.BETA0)
    if assist_mv is None:
        return result
    certified = f_of_alpha(assist_mv, result.threshold) >= 1.0 - config.SLACK
    if not certified:
        logger.warning(f"[Threshold] assisted pairs {assist_mv.pairs} fall below 1 at beta0")
    return result.model_copy(update={"certified": certified})


def find_alpha1(mv: MeasureVector, step: Optional[float] = None) -> ThresholdResult:
    """Leftmost zero of g on [alpha0, cap]: grid scan, then bisection.

    The number of sign changes seen on the grid is reported, since nothing
    guarantees the zero is unique.
    """
    alpha0 = find_alpha0(mv)
    kind = ThresholdKind.ALPHA1_E if mv.measure_kind is MeasureKind.EOF else ThresholdKind.ALPHA1_C
    cap = cap_for(mv.measure_kind)

    def g(alpha: float) -> float:
        return g_of_alpha(mv, alpha)

    grid = alpha_grid(alpha0.threshold, cap, config.GRID_STEP if step is None else step)
    positive = np.array([g(a) > config.BISECTION_TOL for a in grid])
    sign_changes = int(np.count_nonzero(positive[1:] != positive[:-1]))

    if not positive[0]:
        a = float(grid[0])
        return ThresholdResult(threshold=a, bracket=(a, a), residual=abs(g(a)), iterations=0,
                               kind=kind, sign_changes=sign_changes)

    crossings = np.flatnonzero(positive[:-1] & ~positive[1:])
    if crossings.shape[0] == 0:
        raise NoSignChange(f"g stays positive on [{alpha0.threshold:.6f}, {cap:.6f}]")
    k = int(crossings[0])
    lo, hi = float(grid[k]), float(grid[k + 1])
    root, iterations, bracket = _bisect(g, lo, hi, positive_at_lo=True)
    if sign_changes > 1:
        logger.info(f"[Threshold] g changes sign {sign_changes} times; reporting the leftmost zero")
    return ThresholdResult(threshold=root, bracket=bracket, residual=abs(g(root)),
                           iterations=iterations, kind=kind, sign_changes=sign_changes)


def alpha0_closed_form_example1(t: float) -> float:
    """[log2(3 / (2t - sqrt(9 - 6t - 3t^2)))]^-1 for the noisy W mixture."""
    if not EXAMPLE1_T_STAR < t <= 1.0:
        raise DomainError(f"t={t} outside ({EXAMPLE1_T_STAR:.6f}, 1]")
    denom = 2.0 * t - math.sqrt(max(0.0, 9.0 - 6.0 * t - 3.0 * t * t))
    return 1.0 / math.log2(3.0 / denom)


def entanglement_threshold_t(base: PureState, part: Optional[PartitionSpec] = None,
                             pair_index: int = 0) -> float:
    """Smallest t at which rho_AB of (1-t) I/2^n + t|base><base| becomes entangled."""
    part = (part or PartitionSpec.default(base.n_qubits)).check(base.n_qubits)
    pair = partial_trace(base, [part.focus, part.partners[pair_index]]).matrix
    eye = np.eye(4, dtype=np.complex128) / 4.0

    def margin(t: float) -> float:
        return measures.concurrence_margin((1.0 - t) * eye + t * pair)

    if margin(0.0) > 0 or margin(1.0) <= 0:
        raise NoSignChange("pair is not separable at t=0 and entangled at t=1")
    t_star, iterations, _ = _bisect(margin, 0.0, 1.0, positive_at_lo=False, tol=0.0)
    logger.info(f"[Threshold] entanglement threshold t* = {t_star:.10f} ({iterations} iterations)")
    return t_star


# ─────────────────────────────────────────────
# CLASSIFICATION AND REGION CHECKS
# ─────────────────────────────────────────────
def classify(mv: MeasureVector, tol: Optional[float] = None) -> CaseClassification:
    tol = config.ENTANGLED_TOL if tol is None else tol
    entangled = tuple(i for i, v in enumerate(mv.pairs) if v > tol)
    if not entangled:
        case = Case.NO_ENTANGLED_PAIR
    elif len(entangled) == 1:
        case = Case.ONE_PAIR
    elif len(entangled) == len(mv.pairs):
        case = Case.ALL_PAIRS
    else:
        case = Case.TWO_OR_MORE_PAIRS
    return CaseClassification(entangled_pairs=entangled, case=case)


def has_two_entangled_pairs(mv: MeasureVector) -> bool:
    return classify(mv).case in (Case.TWO_OR_MORE_PAIRS, Case.ALL_PAIRS)


def _holds(lhs: float, rhs: float, relation: Relation, slack: float) -> bool:
    if relation is Relation.MONOGAMY_GE:
        return lhs >= rhs - slack
    if relation is Relation.POLYGAMY_LE:
        return lhs <= rhs + slack
    return lhs + slack < rhs


def _report(mv: MeasureVector, alphas: Sequence[float], relation_for,
            slack: Optional[float]) -> InequalityReport:
    slack = config.SLACK if slack is None else slack
    if mv.global_value is None:
        raise DegenerateGlobal("measure vector has no global value")
    points = []
    for alpha in alphas:
        alpha = float(alpha)
        relation = relation_for(alpha)
        lhs = power(mv.global_value, alpha)
        rhs = f_of_alpha(mv, alpha)
        points.append(InequalityPoint(alpha=alpha, lhs=lhs, rhs=rhs, relation=relation,
                                      holds=_holds(lhs, rhs, relation, slack)))
    failures = sum(not p.holds for p in points)
    return InequalityReport(measure_kind=mv.measure_kind, case=classify(mv).case,
                            points=tuple(points), passed=failures == 0, failures=failures)


def verify_region(mv: MeasureVector, alphas: Sequence[float], relation: Relation,
                  slack: Optional[float] = None) -> InequalityReport:
    """Compare global^alpha with f(alpha) point by point; with one entangled pair
    f is that pair's power, which covers the single-pair case."""
    relation = Relation(relation)
    return _report(mv, alphas, lambda _: relation, slack)


def one_pair_relation(mv: MeasureVector, alphas: Sequence[float],
                      slack: Optional[float] = None) -> InequalityReport:
    """Single entangled pair: global^alpha >= pair^alpha for alpha >= 0, <= for alpha <= 0."""
    if classify(mv).case is not Case.ONE_PAIR:
        raise HypothesisNotMet("exactly one entangled pair is required")
    return _report(mv, alphas,
                   lambda a: Relation.MONOGAMY_GE if a >= 0 else Relation.POLYGAMY_LE, slack)


def verify_coa_polygamy(state: PureState, part: Optional[PartitionSpec] = None,
                        n_grid: int = 20, slack: Optional[float] = None) -> CoaPolygamyReport:
    """C^2(A|B...) <= sum_i C_a^2(rho_AB_i), and the beta-power form on [0, beta0]."""
    if not isinstance(state, PureState):
        raise BadParameter("CoA polygamy is checked on pure states")
    c_mv = measures.measure_vector(state, part, MeasureKind.CONCURRENCE)
    coa_mv = measures.measure_vector(state, part, MeasureKind.COA)
    lhs = c_mv.global_value ** 2
    rhs = float(sum(v * v for v in coa_mv.pairs))
    slack = config.SLACK if slack is None else slack
    squared_holds = lhs <= rhs + slack

    beta0 = None
    beta_region = None
    if has_two_entangled_pairs(c_mv):
        beta = find_beta0(c_mv, coa_mv)
        beta0 = beta.threshold
        beta_region = verify_region(coa_mv, alpha_grid(0.0, beta0, n=n_grid), Relation.POLYGAMY_LE, slack)
    passed = squared_holds and (beta_region is None or beta_region.passed)
    return CoaPolygamyReport(lhs_squared=lhs, rhs_squared=rhs, squared_holds=squared_holds,
                             beta0=beta0, beta_region=beta_region, passed=passed)


def compare_weighted_polygamy(state: PureState, part: Optional[PartitionSpec] = None,
                              beta: float = 1.0, budget: Optional[roof.RestartBudget] = None,
                              slack: Optional[float] = None,
                              order_tol: float = 1e-3) -> WeightedPolygamyReport:
    """E^beta(A|B...) against sum_i E_a^beta and the Hamming-weighted sum_i beta^i E_a^beta.

    E_a comes from the roof maximizer and is a lower bound, so a passing
    check is conservative. The weighted form's ordering hypothesis
    E_a(AB_i) <= sum_{j>i} E_a(AB_j) is reported, not enforced.
    """
    if not isinstance(state, PureState):
        raise BadParameter("the weighted comparison is defined for pure states")
    if beta < 0:
        raise BadParameter(f"beta={beta} must be non-negative")
    part = (part or PartitionSpec.default(state.n_qubits)).check(state.n_qubits)

    slack = config.SLACK if slack is None else slack
    e_global = measures.eof_pure(state, part)
    e_mv = measures.measure_vector(state, part, MeasureKind.EOF)
    eoa_pairs = tuple(roof.eoa(partial_trace(state, [part.focus, b]), budget) for b in part.partners)

    beta0 = find_beta0(e_mv).threshold if has_two_entangled_pairs(e_mv) else None
    beta_in_range = beta0 is not None and beta <= beta0 + 1e-12

    lhs = power(e_global, beta)
    nonzero = [(i, v) for i, v in enumerate(eoa_pairs, start=1) if v > config.ENTANGLED_TOL]
    plain_rhs = float(sum(v ** beta for _, v in nonzero))
    weighted_rhs = float(sum(beta ** i * v ** beta for i, v in nonzero))

    condition_met = all(eoa_pairs[i] <= sum(eoa_pairs[i + 1:]) + order_tol
                        for i in range(len(eoa_pairs) - 1))
    weighted_applicable = condition_met and beta <= 1.0

    notes = []
    if not condition_met:
        notes.append("ConditionNotMet: E_a(AB_i) <= sum_{j>i} E_a(AB_j) fails")
    if beta > 1.0:
        notes.append("weighted inequality is only established for beta in [0, 1]")
    elif 0.0 < beta < 1.0:
        notes.append("beta^i < 1 shrinks the weighted right-hand side")
    if not beta_in_range:
        notes.append("beta lies outside [0, beta0]")

    report = WeightedPolygamyReport(
        beta=beta, beta0=beta0, beta_in_range=beta_in_range, lhs=lhs,
        plain_rhs=plain_rhs, weighted_rhs=weighted_rhs,
        plain_holds=lhs <= plain_rhs + slack, weighted_holds=lhs <= weighted_rhs + slack,
        condition_met=condition_met, weighted_applicable=weighted_applicable,
        eoa_pairs=eoa_pairs, notes=tuple(notes),
    )
    logger.info(f"[Weighted] beta={beta}: lhs={lhs:.6f} plain_rhs={plain_rhs:.6f} "
                f"weighted_rhs={weighted_rhs:.6f}")
    return report
