from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel
import logging

import config
import exponents
import harness
import measures
from errors import PolygamyError
from exponents import Relation
from harness import GridSpec
from measures import MeasureKind
from states import PartitionSpec, State, StateFile

# Set up logging
config.setup_logging()
logger = logging.getLogger(__name__)

app = FastAPI(title=config.APP_NAME, version=config.VERSION)

# CORS - allow all origins
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(PolygamyError)
async def polygamy_error_handler(request: Request, exc: PolygamyError):
    """Errors raised while a request body is still being validated."""
    logger.error(f"[{request.url.path}] {type(exc).__name__}: {exc}")
    return JSONResponse(status_code=400, content={"error": str(exc)})


class StateRequest(BaseModel):
    state: StateFile
    focus: int = 0
    partners: Optional[list[int]] = None
    kind: MeasureKind = MeasureKind.CONCURRENCE


class ThresholdRequest(StateRequest):
    which: Literal["alpha0", "alpha1", "beta0"] = "alpha0"


class RegionRequest(StateRequest):
    grid: str = "0:2:0.05"
    relation: Relation = Relation.POLYGAMY_LE


# ─────────────────────────────────────────────
# HELPER: State and partition from a request body
# ─────────────────────────────────────────────
def load_request(data: StateRequest) -> tuple[State, PartitionSpec]:
    state = data.state.to_state()
    n = state.n_qubits
    if data.partners is None:
        part = PartitionSpec.default(n, data.focus)
    else:
        part = PartitionSpec(focus=data.focus, partners=tuple(data.partners))
    return state, part.check(n)


def error_response(route: str, e: Exception) -> JSONResponse:
    if isinstance(e, PolygamyError):
        logger.error(f"[{route}] {type(e).__name__}: {e}")
        return JSONResponse(status_code=400, content={"error": str(e)})
    logger.error(f"[{route}] Error: {e}")
    return JSONResponse(status_code=500, content={"error": f"server error: {str(e)}"})


# ─────────────────────────────────────────────
# ROUTES
# ─────────────────────────────────────────────

@app.get("/")
async def root():
    return {
        "name": config.APP_NAME,
        "version": config.VERSION,
        "endpoints": ["/health", "/api/measure", "/api/threshold",
                      "/api/example/{which}", "/api/verify-region"],
    }

@app.get("/health")
async def health():
    return {
        "status": "healthy",
        "version": config.VERSION,
        "roof_fallback": config.ENABLE_ROOF_FALLBACK,
    }

@app.post("/api/measure")
def measure(data: StateRequest):
    """Global and pairwise values of one measure."""
    try:
        state, part = load_request(data)
        logger.info(f"[/api/measure] {state.n_qubits} qubits, focus={part.focus}, kind={data.kind.value}")
        mv = measures.measure_vector(state, part, data.kind)
        return JSONResponse(status_code=200, content=mv.model_dump(mode="json", by_alias=True))
    except Exception as e:
        return error_response("/api/measure", e)


@app.post("/api/threshold")
def threshold(data: ThresholdRequest):
    """alpha0, alpha1 or beta0 for the requested measure."""
    try:
        state, part = load_request(data)
        logger.info(f"[/api/threshold] {data.which} for {data.kind.value}, {state.n_qubits} qubits")
        if data.which == "beta0":
            if data.kind is MeasureKind.EOF:
                pair_mv = measures.measure_vector(state, part, MeasureKind.EOF, pairs_only=True)
                result = exponents.find_beta0(pair_mv)
            else:
                pair_mv = measures.measure_vector(state, part, MeasureKind.CONCURRENCE, pairs_only=True)
                assist_mv = measures.measure_vector(state, part, MeasureKind.COA, pairs_only=True)
                result = exponents.find_beta0(pair_mv, assist_mv)
        elif data.which == "alpha1":
            result = exponents.find_alpha1(measures.measure_vector(state, part, data.kind))
        else:
            pair_mv = measures.measure_vector(state, part, data.kind, pairs_only=True)
            result = exponents.find_alpha0(pair_mv)
        return JSONResponse(status_code=200, content=result.model_dump(mode="json"))
    except Exception as e:
        return error_response("/api/threshold", e)


@app.get("/api/example/{which}")
def example(which: int):
    """Reproduction table of one worked example."""
    try:
        logger.info(f"[/api/example] Example {which}")
        table = harness.example_table(which)
        return JSONResponse(status_code=200, content=table.model_dump(mode="json"))
    except Exception as e:
        return error_response("/api/example", e)


@app.post("/api/verify-region")
def verify_region(data: RegionRequest):
    """Point-by-point inequality check over an alpha grid."""
    try:
        state, part = load_request(data)
        logger.info(f"[/api/verify-region] {data.relation.value} on {data.grid} for {data.kind.value}")
        mv = measures.measure_vector(state, part, data.kind)
        report = exponents.verify_region(mv, GridSpec.parse(data.grid).values(), data.relation)
        return JSONResponse(status_code=200, content=report.model_dump(mode="json"))
    except Exception as e:
        return error_response("/api/verify-region", e)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=config.PORT)
