"""
Runtime settings for the polygamy toolkit.

Everything is read once from the environment at import time; the CLI
overrides individual values per run through RunConfig.
"""
import logging
import os

logger = logging.getLogger(__name__)

APP_NAME = "Polygamy API"
VERSION = "1.0"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, '')
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"[Config] {name}={raw!r} is not an integer, using {default}")
        return default


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name, '').strip().lower()
    if not raw:
        return default
    if raw in ('1', 'true', 'yes', 'on'):
        return True
    if raw in ('0', 'false', 'no', 'off'):
        return False
    logger.warning(f"[Config] {name}={raw!r} is not a boolean, using {default}")
    return default


LOG_LEVEL = os.getenv('POLYGAMY_LOG_LEVEL', 'INFO').upper()
PORT = _env_int('PORT', 10000)
DEFAULT_SEED = _env_int('POLYGAMY_SEED', 42)
DEFAULT_RESTARTS = _env_int('POLYGAMY_ROOF_RESTARTS', 20)
ENABLE_ROOF_FALLBACK = _env_bool('POLYGAMY_ROOF_FALLBACK', True)

# ─────────────────────────────────────────────
# Numerical tolerances
# ─────────────────────────────────────────────
HERMITIAN_TOL = 1e-10
PSD_CLAMP = 1e-10
# eigenvalues below this are rounding noise, treated as exact zeros before sqrt
ZERO_FLOOR = 1e-15
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
NORM_TOL = 1e-10

ENTANGLED_TOL = 1e-9
SLACK = 1e-9
GRID_STEP = 1e-3
BISECTION_MAX_ITER = 200
BISECTION_TOL = 1e-12

ROOF_MAX_RANK = 8
# optimizer evaluations allowed per real parameter, per restart
ROOF_EVALS_PER_PARAM = 40
ROOF_GRAD_TOL = 1e-9
ROOF_AGREEMENT = 1e-4


def setup_logging(level: str | None = None) -> None:
    """Configure root logging once; later calls only adjust the level."""
    level_name = (level or LOG_LEVEL).upper()
    numeric = getattr(logging, level_name, logging.INFO)
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(level=numeric)
    root.setLevel(numeric)
