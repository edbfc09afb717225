"""
Reproduction tables, figure series and the seeded verification suites.

Shared by the CLI and the API. Every random state is drawn from a seed
derived from (run seed, qubit count, index), so a suite's outcome does not
depend on how the work is split across processes.
"""
import concurrent.futures
import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, model_validator

import config
import exponents
import measures
import roof
from errors import BadConfig, BadParameter, PolygamyError
from exponents import Case, Relation
from measures import MeasureKind, MeasureVector
from states import (PartitionSpec, PureState, State, example2_state, format_float,
                    haar_random_pure, isotropic_mixture, partial_trace, product_state,
                    random_rank_deficient, bell_state, w_state)

logger = logging.getLogger(__name__)

ORACLE_TOL = 2e-3
ONE_SIDED_TOL = 1e-6
RECONSTRUCTION_TOL = 1e-6
ROOT_TOL = 1e-10
ALPHA1_TOL = 1e-8
NEGATIVE_ALPHAS = (-2.0, -1.0)
REGION_POINTS = 20


# ─────────────────────────────────────────────
# EXAMPLE TABLES
# ─────────────────────────────────────────────
class ExampleRow(BaseModel):
    quantity: str
    expected: float
    computed: float
    diff: float
    tol: float
    ok: bool


class ExampleTable(BaseModel):
    example: int
    rows: list[ExampleRow]
    passed: bool


def _row(quantity: str, expected: float, computed: float, tol: float) -> ExampleRow:
    diff = abs(computed - expected)
    return ExampleRow(quantity=quantity, expected=expected, computed=computed,
                      diff=diff, tol=tol, ok=diff <= tol)


def _example1() -> list[ExampleRow]:
    w3 = w_state()
    rows = []
    full = isotropic_mixture(1.0, w3)
    mv = measures.measure_vector(full, kind=MeasureKind.CONCURRENCE)
    rows.append(_row("C(A|BC), t=1", 2 * math.sqrt(2) / 3, mv.global_value, 1e-10))
    rows.append(_row("C(AB), t=1", 2 / 3, mv.pairs[0], 1e-10))
    rows.append(_row("C(AC), t=1", 2 / 3, mv.pairs[1], 1e-10))
    rows.append(_row("alpha0, t=1", 1.70951, exponents.find_alpha0(mv).threshold, 1e-4))
    rows.append(_row("t*", 0.783612, exponents.entanglement_threshold_t(w3), 1e-5))

    pair_09 = measures.concurrence_mixed(partial_trace(isotropic_mixture(0.9, w3), [0, 1]))
    rows.append(_row("C(AB) closed form, t=0.9", measures.example1_pair_concurrence(0.9),
                     pair_09, 1e-10))

    worst = 0.0
    for t in exponents.alpha_grid(0.79, 1.0, n=20):
        pairs_mv = measures.measure_vector(isotropic_mixture(float(t), w3),
                                           kind=MeasureKind.CONCURRENCE, pairs_only=True)
        found = exponents.find_alpha0(pairs_mv).threshold
        worst = max(worst, abs(found - exponents.alpha0_closed_form_example1(float(t))))
    rows.append(_row("max |alpha0 closed form - root|, t in [0.79, 1]", 0.0, worst, 1e-6))
    return rows


def _example2() -> list[ExampleRow]:
    mv = measures.measure_vector(example2_state(), kind=MeasureKind.CONCURRENCE)
    expected_pairs = (math.sqrt(6) / 15, 2 * math.sqrt(2) / 15, 2 / 5)
    rows = [_row(f"C(AB{i + 1})", e, c, 1e-10)
            for i, (e, c) in enumerate(zip(expected_pairs, mv.pairs))]
    rows.append(_row("C(A|B1B2B3)", 2 * math.sqrt(14) / 15, mv.global_value, 1e-10))
    rows.append(_row("alpha0", 0.783586, exponents.find_alpha0(mv).threshold, 1e-5))
    return rows


def _example3() -> list[ExampleRow]:
    mv = measures.measure_vector(w_state(), kind=MeasureKind.EOF)
    alpha1 = exponents.find_alpha1(mv)
    return [
        _row("E(A|BC)", 0.918296, mv.global_value, 1e-6),
        _row("E(AB)", 0.550048, mv.pairs[0], 1e-6),
        _row("E(AC)", 0.550048, mv.pairs[1], 1e-6),
        _row("alpha0 (EoF)", 1.15959, exponents.find_alpha0(mv).threshold, 1e-4),
        _row("beta0 (EoF)", 1.15959, exponents.find_beta0(mv).threshold, 1e-4),
        _row("alpha1 (EoF)", 1.35244, alpha1.threshold, 1e-4),
        _row("sign changes of g", 1.0, float(alpha1.sign_changes), 0.0),
    ]


_EXAMPLES = {1: _example1, 2: _example2, 3: _example3}


def example_table(which: int) -> ExampleTable:
    if which not in _EXAMPLES:
        raise BadParameter(f"unknown example {which}; expected one of {sorted(_EXAMPLES)}")
    rows = _EXAMPLES[which]()
    passed = all(r.ok for r in rows)
    logger.info(f"[Example] {which}: {sum(r.ok for r in rows)}/{len(rows)} rows within tolerance")
    return ExampleTable(example=which, rows=rows, passed=passed)


# ─────────────────────────────────────────────
# FIGURES AND SWEEPS
# ─────────────────────────────────────────────
class GridSpec(BaseModel):
    start: float
    stop: float
    step: float

    @model_validator(mode="after")
    def _ordered(self):
        if not self.start < self.stop:
            raise BadConfig(f"grid start {self.start} must be below stop {self.stop}")
        if self.step <= 0:
            raise BadConfig(f"grid step {self.step} must be positive")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise BadConfig(f"grid {text!r} is not of the form start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as e:
            raise BadConfig(f"grid {text!r}: {e}") from e
        return cls(start=start, stop=stop, step=step)

    def values(self):
        return exponents.alpha_grid(self.start, self.stop, self.step)


FIG1_T_START = 0.783612
FIG_ALPHA_STOP = 2.5
FIG_ALPHA_STEP = 0.005

Rows = list[tuple[float, ...]]


def _power_rows(mv: MeasureVector, grid: Iterable[float], with_g: bool = False) -> Rows:
    rows = []
    for alpha in grid:
        alpha = float(alpha)
        lhs = exponents.power(mv.global_value, alpha)
        rhs = exponents.f_of_alpha(mv, alpha)
        rows.append((alpha, lhs, rhs, rhs - lhs) if with_g else (alpha, lhs, rhs))
    return rows


def _figure1() -> Rows:
    w3 = w_state()
    rows = []
    for t in exponents.alpha_grid(FIG1_T_START, 1.0, 0.001):
        mv = measures.measure_vector(isotropic_mixture(float(t), w3),
                                     kind=MeasureKind.CONCURRENCE, pairs_only=True)
        rows.append((float(t), exponents.find_alpha0(mv).threshold))
    return rows


def figure_rows(which: int) -> tuple[list[str], Rows]:
    """Header and rows of figure 1 (alpha0 against t) or figures 2-4 (both sides against alpha)."""
    if which == 1:
        return ["t", "alpha0"], _figure1()
    sources = {
        2: (w_state, MeasureKind.CONCURRENCE),
        3: (example2_state, MeasureKind.CONCURRENCE),
        4: (w_state, MeasureKind.EOF),
    }
    if which not in sources:
        raise BadParameter(f"unknown figure {which}; expected 1..4")
    build, kind = sources[which]
    mv = measures.measure_vector(build(), kind=kind)
    grid = exponents.alpha_grid(0.0, FIG_ALPHA_STOP, FIG_ALPHA_STEP)
    return ["alpha", "lhs", "rhs"], _power_rows(mv, grid)


def sweep_rows(state: State, part: Optional[PartitionSpec], kind: MeasureKind,
               grid: Sequence[float]) -> tuple[list[str], Rows]:
    mv = measures.measure_vector(state, part, kind)
    if mv.approximate:
        logger.warning("[Sweep] global value comes from the roof optimizer")
    return ["alpha", "lhs", "rhs", "g"], _power_rows(mv, grid, with_g=True)


def format_csv(header: Sequence[str], rows: Rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, float, np.floating, np.integer)):
        return format_float(v)
    return str(getattr(v, "value", v))


def write_csv(header: Sequence[str], rows: Rows, out=None) -> None:
    text = format_csv(header, rows)
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    logger.info(f"[CSV] Wrote {len(rows)} rows to {path}")


# ─────────────────────────────────────────────
# VERIFICATION SUITES
# ─────────────────────────────────────────────
SUITE_ORDER = (
    "alpha0_root",
    "polygamy_region",
    "monogamy_region",
    "alpha1_bracket",
    "coa_polygamy",
    "negative_exponent",
    "single_pair_case",
    "weighted_polygamy",
    "oracle_concurrence",
    "oracle_coa",
    "oracle_reconstruction",
    "eoa_polygamy",
)
MAX_DETAILS = 10


class Outcome(BaseModel):
    suite: str
    ok: bool = True
    skipped: bool = False
    detail: str = ""


class SuiteSummary(BaseModel):
    name: str
    checked: int = 0
    failures: int = 0
    skipped: int = 0
    details: list[str] = []


class VerifyReport(BaseModel):
    seed: int
    ensemble: int
    ensemble4: int
    oracle: bool
    suites: list[SuiteSummary]
    passed: bool


def _apply_overrides(overrides: dict[str, float]) -> None:
    # workers started with spawn or forkserver re-import config
    for name, value in overrides.items():
        setattr(config, name, value)


def _check(suite: str, label: str, run) -> Outcome:
    try:
        ok, detail = run()
    except PolygamyError as e:
        return Outcome(suite=suite, ok=False, detail=f"{label}: {type(e).__name__}: {e}")
    return Outcome(suite=suite, ok=ok, detail="" if ok else f"{label}: {detail}")


def _region_checks(mv: MeasureVector, label: str) -> list[Outcome]:
    tag = f"{label} [{mv.measure_kind.value}]"
    if not exponents.has_two_entangled_pairs(mv):
        return [Outcome(suite=s, skipped=True)
                for s in ("alpha0_root", "polygamy_region", "monogamy_region", "alpha1_bracket")]
    cap = exponents.cap_for(mv.measure_kind)
    alpha0 = exponents.find_alpha0(mv)

    def root():
        f = exponents.f_of_alpha(mv, alpha0.threshold)
        in_range = alpha0.saturated or 0.0 < alpha0.threshold <= cap
        return abs(f - 1.0) <= ROOT_TOL and in_range, f"f(alpha0)={f!r}, alpha0={alpha0.threshold!r}"

    def polygamy():
        report = exponents.verify_region(mv, exponents.alpha_grid(0.0, alpha0.threshold, n=REGION_POINTS),
                                         Relation.POLYGAMY_LE)
        return report.passed, f"{report.failures} failing points"

    def monogamy():
        stop = 4.0 if mv.measure_kind is MeasureKind.CONCURRENCE else 3.0
        report = exponents.verify_region(mv, exponents.alpha_grid(cap, stop, n=REGION_POINTS),
                                         Relation.MONOGAMY_GE)
        return report.passed, f"{report.failures} failing points"

    def bracket():
        alpha1 = exponents.find_alpha1(mv)
        g = exponents.g_of_alpha(mv, alpha1.threshold)
        ok = alpha0.threshold - 1e-12 <= alpha1.threshold <= cap + 1e-12 and abs(g) <= ALPHA1_TOL
        return ok, f"alpha1={alpha1.threshold!r}, g={g!r}"

    return [_check("alpha0_root", tag, root), _check("polygamy_region", tag, polygamy),
            _check("monogamy_region", tag, monogamy), _check("alpha1_bracket", tag, bracket)]


def pure_state_checks(state: PureState, label: str) -> list[Outcome]:
    """Every property suite that applies to one pure state, focus on qubit 0."""
    c_mv = measures.measure_vector(state, kind=MeasureKind.CONCURRENCE)
    e_mv = measures.measure_vector(state, kind=MeasureKind.EOF)
    outcomes = _region_checks(c_mv, label) + _region_checks(e_mv, label)

    def coa_polygamy():
        report = exponents.verify_coa_polygamy(state)
        return report.passed, f"lhs={report.lhs_squared!r}, rhs={report.rhs_squared!r}"

    outcomes.append(_check("coa_polygamy", label, coa_polygamy))

    case = exponents.classify(c_mv).case
    if case is Case.ALL_PAIRS:
        def negative():
            report = exponents.verify_region(c_mv, NEGATIVE_ALPHAS, Relation.POLYGAMY_LT)
            return report.passed, f"{report.failures} failing points"
        outcomes.append(_check("negative_exponent", label, negative))
    else:
        outcomes.append(Outcome(suite="negative_exponent", skipped=True))

    if case is Case.ONE_PAIR:
        def one_pair():
            report = exponents.one_pair_relation(c_mv, exponents.alpha_grid(-2.0, 2.0, n=9))
            return report.passed, f"{report.failures} failing points"
        outcomes.append(_check("single_pair_case", label, one_pair))
    return outcomes


def _pure_task(task: tuple[int, int, int, dict]) -> list[Outcome]:
    seed, n_qubits, index, overrides = task
    _apply_overrides(overrides)
    state = haar_random_pure(n_qubits, [seed, n_qubits, index])
    return pure_state_checks(state, f"{n_qubits}q#{index}")


def oracle_checks(seed: int, index: int, budget: roof.RestartBudget) -> list[Outcome]:
    """Roof optimizer against the two-qubit closed forms on a rank-2 state, plus the
    assisted-EoF polygamy of its 3-qubit purification."""
    label = f"oracle#{index}"
    seq = [seed, 2, index]
    rho = random_rank_deficient(2, 1, seq)
    purification = haar_random_pure(3, seq)
    c = measures.concurrence_mixed(rho)
    c_assist = measures.coa(rho)
    low = roof.roof_optimize(rho, kind=roof.RoofMeasure.CONCURRENCE, direction=roof.Direction.MIN,
                             budget=budget)
    high = roof.roof_optimize(rho, kind=roof.RoofMeasure.CONCURRENCE, direction=roof.Direction.MAX,
                              budget=budget)

    def concurrence():
        ok = abs(low.value - c) <= ORACLE_TOL and low.value >= c - ONE_SIDED_TOL
        return ok, f"roof min {low.value!r} vs Wootters {c!r}"

    def assistance():
        ok = abs(high.value - c_assist) <= ORACLE_TOL and high.value <= c_assist + ONE_SIDED_TOL
        return ok, f"roof max {high.value!r} vs sum of lambdas {c_assist!r}"

    def reconstruction():
        err = max(float(np.max(np.abs(r.best.reconstruct() - rho.matrix))) for r in (low, high))
        return err <= RECONSTRUCTION_TOL, f"max reconstruction error {err:.3e}"

    def eoa_polygamy():
        lhs = measures.eof_pure(purification)
        rhs = sum(roof.eoa(partial_trace(purification, [0, b]), budget) for b in (1, 2))
        return lhs <= rhs + ORACLE_TOL, f"E(A|BC)={lhs!r} > sum E_a={rhs!r}"

    return [_check("oracle_concurrence", label, concurrence),
            _check("oracle_coa", label, assistance),
            _check("oracle_reconstruction", label, reconstruction),
            _check("eoa_polygamy", label, eoa_polygamy)]


def _oracle_task(task: tuple[int, int, roof.RestartBudget, dict]) -> list[Outcome]:
    seed, index, budget, overrides = task
    _apply_overrides(overrides)
    return oracle_checks(seed, index, budget)


def _bell_with_spectator() -> PureState:
    amps = np.kron(bell_state("phi+").amplitudes, product_state([0]).amplitudes)
    return PureState(n_qubits=3, amplitudes=amps)


def fixed_checks(budget: roof.RestartBudget) -> list[Outcome]:
    """Structured states that the random ensembles almost never produce."""
    outcomes = []
    outcomes += pure_state_checks(w_state(), "W3")
    outcomes += pure_state_checks(example2_state(), "example2")
    outcomes += pure_state_checks(_bell_with_spectator(), "phi+ x |0>")
    outcomes += pure_state_checks(product_state([0, 0, 0]), "|000>")

    def weighted():
        report = exponents.compare_weighted_polygamy(w_state(), beta=1.1, budget=budget)
        return report.plain_holds, f"lhs={report.lhs!r} > rhs={report.plain_rhs!r}"

    outcomes.append(_check("weighted_polygamy", "W3 beta=1.1", weighted))
    return outcomes


def _fan_out(func, tasks: list, workers: int) -> list[list[Outcome]]:
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
        # map yields in submission order
        return list(executor.map(func, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _summarize(outcomes: Iterable[Outcome]) -> list[SuiteSummary]:
    summaries = {name: SuiteSummary(name=name) for name in SUITE_ORDER}
    for o in outcomes:
        s = summaries[o.suite]
        if o.skipped:
            s.skipped += 1
            continue
        s.checked += 1
        if not o.ok:
            s.failures += 1
            if len(s.details) < MAX_DETAILS:
                s.details.append(o.detail)
    return [summaries[name] for name in SUITE_ORDER]


def run_verify(seed: int = config.DEFAULT_SEED, ensemble: int = 0, ensemble4: int = 0,
               oracle: bool = False, workers: int = 1,
               budget: Optional[roof.RestartBudget] = None) -> VerifyReport:
    """Fixed-state checks, then `ensemble` 3-qubit and `ensemble4` 4-qubit Haar states;
    with `oracle`, also `ensemble` rank-2 two-qubit states through the roof optimizer."""
    if ensemble < 0 or ensemble4 < 0:
        raise BadParameter("ensemble sizes must be non-negative")
    budget = budget or roof.RestartBudget()
    overrides = {name: getattr(config, name) for name in ("ENTANGLED_TOL", "SLACK", "GRID_STEP")}

    outcomes = fixed_checks(budget)
    pure_tasks = ([(seed, 3, i, overrides) for i in range(ensemble)]
                  + [(seed, 4, i, overrides) for i in range(ensemble4)])
    logger.info(f"[Verify] {len(pure_tasks)} pure states, seed={seed}, workers={workers}")
    for batch in _fan_out(_pure_task, pure_tasks, workers):
        outcomes += batch

    if oracle:
        oracle_tasks = [(seed, i, budget, overrides) for i in range(ensemble)]
        logger.info(f"[Verify] {len(oracle_tasks)} oracle states, restarts={budget.restarts}")
        for batch in _fan_out(_oracle_task, oracle_tasks, workers):
            outcomes += batch

    suites = _summarize(outcomes)
    for s in suites:
        if s.failures:
            logger.error(f"[Verify] {s.name}: {s.failures}/{s.checked} failed")
    passed = all(s.failures == 0 for s in suites)
    return VerifyReport(seed=seed, ensemble=ensemble, ensemble4=ensemble4, oracle=oracle,
                        suites=suites, passed=passed)
