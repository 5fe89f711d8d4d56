from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from typing import Any, Dict
import logging
from datetime import datetime

from cat_state_lab import __version__
from cat_state_lab.api.routes import runs
from cat_state_lab.config.settings import SimulationConfig

# Configure logging
logging.basicConfig(
    level=getattr(logging, SimulationConfig.LOG_LEVEL, logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Create FastAPI app
app = FastAPI(
    title="Cat State Lab API",
    description="Run optical cat-state simulations and fetch their datasets",
    version=__version__
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(runs.router, prefix="/api/v1", tags=["runs"])


@app.get("/health")
async def health_check() -> Dict[str, Any]:
    """Health check endpoint."""
    return {
        "status": "healthy",
        "timestamp": datetime.utcnow().isoformat(),
        "version": __version__
    }


@app.on_event("startup")
async def startup_event():
    """Log the numerical configuration once at startup."""
    SimulationConfig.log_config()
    logger.info(f"Cat State Lab API {__version__} started")
