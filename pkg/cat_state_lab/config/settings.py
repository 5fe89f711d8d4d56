from typing import Any, Dict, Iterator, Optional
from contextlib import contextmanager
from contextvars import ContextVar
import logging
import math
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

_tail_tol_override: ContextVar[Optional[float]] = ContextVar("catlab_tail_tol", default=None)


class SimulationConfig:
    """Numerical tolerances and defaults for the cat-state simulations."""

    # Normalization and truncation
    TOL_NORM = float(os.getenv("CATLAB_TOL_NORM", "1e-9"))
    TAIL_TOL = float(os.getenv("CATLAB_TAIL_TOL", "1e-10"))
    DARK_TAIL_TOL = float(os.getenv("CATLAB_DARK_TAIL_TOL", "1e-12"))
    ZERO_PROBABILITY = 1e-300

    # Quadrature
    QUAD_NODES = int(os.getenv("CATLAB_QUAD_NODES", "200"))
    QUAD_MAX_NODES = int(os.getenv("CATLAB_QUAD_MAX_NODES", "800"))
    QUAD_TOL = float(os.getenv("CATLAB_QUAD_TOL", "1e-9"))

    # Coherent-state superpositions
    CSS_MAX_TERMS = int(os.getenv("CATLAB_CSS_MAX_TERMS", "4096"))
    CSS_MERGE_TOL = 1e-12

    # Kerr master equation
    KERR_RTOL = float(os.getenv("CATLAB_KERR_RTOL", "1e-9"))
    KERR_ATOL = float(os.getenv("CATLAB_KERR_ATOL", "1e-12"))
    SERIES_MISMATCH_TOL = 1e-3

    # Optimizer
    OPT_GRID_POINTS = int(os.getenv("CATLAB_OPT_GRID_POINTS", "9"))
    OPT_TOP_SEEDS = int(os.getenv("CATLAB_OPT_TOP_SEEDS", "5"))
    OPT_MAX_EVALS = int(os.getenv("CATLAB_OPT_MAX_EVALS", "2000"))
    OPT_TOL_F = float(os.getenv("CATLAB_OPT_TOL_F", "1e-6"))

    # Kitten growth
    GROWTH_MAX_COMPONENTS = int(os.getenv("CATLAB_GROWTH_MAX_COMPONENTS", "24"))
    GROWTH_EIG_TOL = float(os.getenv("CATLAB_GROWTH_EIG_TOL", "1e-9"))

    # Sweeps
    SWEEP_WORKERS = int(os.getenv("CATLAB_SWEEP_WORKERS", "4"))

    # API Configuration
    API_HOST = os.getenv("API_HOST", "0.0.0.0")
    API_PORT = int(os.getenv("API_PORT", "8000"))

    LOG_LEVEL = os.getenv("CATLAB_LOG_LEVEL", "INFO")

    @classmethod
    def tail_tol(cls) -> float:
        """Truncation tolerance, honouring an ``override_tail_tol`` block in the current context."""
        override = _tail_tol_override.get()
        return cls.TAIL_TOL if override is None else override

    @classmethod
    @contextmanager
    def override_tail_tol(cls, value: Optional[float]) -> Iterator[float]:
        """Use ``value`` as the tail tolerance inside the block; None keeps the configured one."""
        token = _tail_tol_override.set(value)
        try:
            yield cls.tail_tol()
        finally:
            _tail_tol_override.reset(token)

    @classmethod
    def truncation_dim(cls, amplitude: complex) -> int:
        """Fock dimension keeping the tail of a coherent state of this size below 1e-10."""
        a = abs(amplitude)
        return int(math.ceil(a * a + 10.0 * a + 20.0))

    @classmethod
    def as_dict(cls) -> Dict[str, Any]:
        return {
            name: getattr(cls, name)
            for name in dir(cls)
            if name.isupper() and not name.startswith("_")
        }

    @classmethod
    def log_config(cls) -> None:
        for name, value in cls.as_dict().items():
            logger.debug(f"{name} = {value}")
