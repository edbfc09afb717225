"""
Command-line entry point.

    python cli.py measure --state w3.json --kind concurrence
    python cli.py threshold --state w3.json --kind eof --which alpha1
    python cli.py example 2
    python cli.py figure 4 --out fig4.csv
    python cli.py verify --ensemble 500 --ensemble4 200 --seed 42
    python cli.py sweep --state psi.json --grid 0:2.5:0.005
    python cli.py serve

Exit codes: 0 success, 1 verification failure, 2 input error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ValidationError, model_validator

import config
import exponents
import harness
import measures
import roof
from errors import BadConfig, PolygamyError
from harness import GridSpec
from measures import MeasureKind
from states import PartitionSpec, State, load_state

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

THRESHOLD_HEADER = ["kind", "threshold", "bracket_lo", "bracket_hi", "residual", "iterations",
                    "saturated", "sign_changes", "certified"]


# ─────────────────────────────────────────────
# RUN CONFIG
# ─────────────────────────────────────────────
class RunConfig(BaseModel):
    command: str
    state: Optional[Path] = None
    focus: int = 0
    partners: Optional[tuple[int, ...]] = None
    kind: MeasureKind = MeasureKind.CONCURRENCE
    which: Optional[str] = None
    grid: Optional[GridSpec] = None
    seed: int = config.DEFAULT_SEED
    out: Optional[Path] = None
    format: Optional[Literal["csv", "json"]] = None
    allow_roof: bool = config.ENABLE_ROOF_FALLBACK
    ensemble: int = 0
    ensemble4: int = 0
    oracle: bool = False
    workers: int = 1
    restarts: int = config.DEFAULT_RESTARTS

    @model_validator(mode="after")
    def _paths(self):
        if self.command in ("measure", "threshold", "sweep") and not (self.state and str(self.state)):
            raise BadConfig(f"'{self.command}' needs --state")
        if self.ensemble < 0 or self.ensemble4 < 0:
            raise BadConfig("ensemble sizes must be non-negative")
        if self.workers < 1:
            raise BadConfig("--workers must be at least 1")
        if self.restarts < 1:
            raise BadConfig("--restarts must be at least 1")
        return self

    def partition(self, n_qubits: int) -> PartitionSpec:
        if self.partners is None:
            return PartitionSpec.default(n_qubits, self.focus).check(n_qubits)
        return PartitionSpec(focus=self.focus, partners=self.partners).check(n_qubits)


def _parse_partners(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"partners {text!r}: {e}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polygamy",
        description="Entanglement measures and polygamy/monogamy exponent thresholds for qubit states.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--tol-entangled", type=float, default=None,
                        help=f"pair counts as entangled above this (default {config.ENTANGLED_TOL})")
    parser.add_argument("--tol-slack", type=float, default=None,
                        help=f"inequality slack (default {config.SLACK})")
    parser.add_argument("--grid-step", type=float, default=None,
                        help=f"alpha1 scan step (default {config.GRID_STEP})")
    sub = parser.add_subparsers(dest="command", required=True)

    def state_args(p):
        p.add_argument("--state", required=True, help="state file (JSON)")
        p.add_argument("--focus", type=int, default=0, help="focus qubit A")
        p.add_argument("--partners", type=_parse_partners, default=None,
                       help="comma-separated partner qubits, default all others in order")
        p.add_argument("--kind", choices=[k.value for k in MeasureKind], default="concurrence")

    def output_args(p):
        p.add_argument("--out", default=None, help="output path, stdout when omitted")
        p.add_argument("--format", choices=["csv", "json"], default=None)

    p = sub.add_parser("measure", help="global and pairwise measure values")
    state_args(p)
    p.add_argument("--no-roof", action="store_true", help="fail instead of optimizing mixed global values")
    output_args(p)

    p = sub.add_parser("threshold", help="alpha0, alpha1 or beta0")
    state_args(p)
    p.add_argument("--which", choices=["alpha0", "alpha1", "beta0"], default="alpha0")
    output_args(p)

    p = sub.add_parser("example", help="reproduce a worked example")
    p.add_argument("which", type=int, choices=[1, 2, 3])
    output_args(p)

    p = sub.add_parser("figure", help="CSV series behind a figure")
    p.add_argument("which", type=int, choices=[1, 2, 3, 4])
    output_args(p)

    p = sub.add_parser("verify", help="seeded property and oracle suites")
    p.add_argument("--ensemble", type=int, default=500, help="3-qubit Haar states (and oracle states)")
    p.add_argument("--ensemble4", type=int, default=200, help="4-qubit Haar states")
    p.add_argument("--oracle", action="store_true", help="roof optimizer against closed forms")
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--restarts", type=int, default=config.DEFAULT_RESTARTS)
    output_args(p)

    p = sub.add_parser("sweep", help="alpha,lhs,rhs,g over a grid for any state")
    state_args(p)
    p.add_argument("--grid", default="0:2.5:0.005", help="start:stop:step")
    output_args(p)

    sub.add_parser("serve", help="run the JSON API with uvicorn")
    return parser


def to_run_config(args: argparse.Namespace) -> RunConfig:
    raw = {k: v for k, v in vars(args).items() if v is not None and k in RunConfig.model_fields}
    if "which" in raw:
        raw["which"] = str(raw["which"])
    if "grid" in raw:
        raw["grid"] = GridSpec.parse(raw["grid"])
    if getattr(args, "no_roof", False):
        raw["allow_roof"] = False
    try:
        return RunConfig(**raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        raise BadConfig(f"{field}: {first['msg']}") from e


def apply_tolerances(args: argparse.Namespace) -> None:
    for flag, name in (("tol_entangled", "ENTANGLED_TOL"), ("tol_slack", "SLACK"),
                       ("grid_step", "GRID_STEP")):
        value = getattr(args, flag, None)
        if value is None:
            continue
        if value <= 0:
            raise BadConfig(f"--{flag.replace('_', '-')} must be positive")
        setattr(config, name, value)
        logger.info(f"[CLI] {name} = {value}")


# ─────────────────────────────────────────────
# COMMANDS
# ─────────────────────────────────────────────
def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8", newline="\n")
    logger.info(f"[CLI] Wrote {out}")


def _load(cfg: RunConfig) -> tuple[State, PartitionSpec]:
    state = load_state(cfg.state)
    return state, cfg.partition(state.n_qubits)


def cmd_measure(cfg: RunConfig) -> int:
    state, part = _load(cfg)
    mv = measures.measure_vector(state, part, cfg.kind, allow_roof=cfg.allow_roof)
    if cfg.format == "csv":
        header = ["global"] + [f"pair_{b}" for b in part.partners]
        harness.write_csv(header, [(mv.global_value, *mv.pairs)], cfg.out)
    else:
        _emit(mv.model_dump_json(by_alias=True, indent=2), cfg.out)
    return EXIT_OK


def cmd_threshold(cfg: RunConfig) -> int:
    state, part = _load(cfg)
    if cfg.which == "beta0":
        if cfg.kind is MeasureKind.EOF:
            result = exponents.find_beta0(measures.measure_vector(state, part, MeasureKind.EOF,
                                                                  pairs_only=True))
        else:
            pair_mv = measures.measure_vector(state, part, MeasureKind.CONCURRENCE, pairs_only=True)
            assist_mv = measures.measure_vector(state, part, MeasureKind.COA, pairs_only=True)
            result = exponents.find_beta0(pair_mv, assist_mv)
    elif cfg.which == "alpha1":
        mv = measures.measure_vector(state, part, cfg.kind, allow_roof=cfg.allow_roof)
        result = exponents.find_alpha1(mv)
    else:
        mv = measures.measure_vector(state, part, cfg.kind, pairs_only=True)
        result = exponents.find_alpha0(mv)
    logger.info(f"[CLI] {result.kind.value} = {result.threshold:.10f}")
    if cfg.format == "csv":
        harness.write_csv(THRESHOLD_HEADER, [(result.kind, result.threshold, *result.bracket,
                                              result.residual, result.iterations, result.saturated,
                                              result.sign_changes, result.certified)], cfg.out)
    else:
        _emit(result.model_dump_json(indent=2), cfg.out)
    return EXIT_OK


def cmd_example(cfg: RunConfig) -> int:
    table = harness.example_table(int(cfg.which))
    if cfg.format == "json":
        _emit(table.model_dump_json(indent=2), cfg.out)
    else:
        lines = [f"{'quantity':<48} {'expected':>14} {'computed':>20} {'diff':>10}  ok"]
        for r in table.rows:
            lines.append(f"{r.quantity:<48} {r.expected:>14.10g} {r.computed:>20.15g} "
                         f"{r.diff:>10.2e}  {'yes' if r.ok else 'NO'}")
        _emit("\n".join(lines), cfg.out)
    return EXIT_OK if table.passed else EXIT_FAILED


def cmd_figure(cfg: RunConfig) -> int:
    header, rows = harness.figure_rows(int(cfg.which))
    harness.write_csv(header, rows, cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    budget = roof.RestartBudget(restarts=cfg.restarts)
    report = harness.run_verify(seed=cfg.seed, ensemble=cfg.ensemble, ensemble4=cfg.ensemble4,
                                oracle=cfg.oracle, workers=cfg.workers, budget=budget)
    _emit(report.model_dump_json(indent=2), cfg.out)
    for s in report.suites:
        logger.info(f"[Verify] {s.name}: checked={s.checked} failures={s.failures} skipped={s.skipped}")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_sweep(cfg: RunConfig) -> int:
    state, part = _load(cfg)
    grid = (cfg.grid or GridSpec.parse("0:2.5:0.005")).values()
    header, rows = harness.sweep_rows(state, part, cfg.kind, grid)
    harness.write_csv(header, rows, cfg.out)
    return EXIT_OK


def cmd_serve(cfg: RunConfig) -> int:
    import uvicorn
    from main import app
    uvicorn.run(app, host="0.0.0.0", port=config.PORT)
    return EXIT_OK


COMMANDS = {
    "measure": cmd_measure,
    "threshold": cmd_threshold,
    "example": cmd_example,
    "figure": cmd_figure,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "serve": cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config.setup_logging(args.log_level)
    try:
        apply_tolerances(args)
        cfg = to_run_config(args)
        return COMMANDS[cfg.command](cfg)
    except PolygamyError as e:
        logger.error(f"[CLI] {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
