from fastapi import APIRouter, HTTPException
from pydantic import BaseModel
from typing import Any, Dict, List, Optional
import math
import logging

from cat_state_lab.commands import CommandRegistry
from cat_state_lab.errors import CatLabError
from cat_state_lab.models import RunSpec

router = APIRouter()
logger = logging.getLogger(__name__)


class RunRequest(BaseModel):
    params: Dict[str, Any] = {}
    dim_override: Optional[int] = None
    tol_override: Optional[float] = None


@router.get("/commands")
async def list_commands() -> List[Dict[str, Any]]:
    """Available commands with their descriptions and default parameters."""
    return [
        {
            "name": name,
            "description": CommandRegistry.get(name)["description"],
            "defaults": CommandRegistry.defaults(name),
        }
        for name in CommandRegistry.names()
    ]


@router.post("/run/{command}")
def run_command(command: str, request: RunRequest) -> Dict[str, Any]:
    """
    Run a command and return its records.

    Args:
        command: Command name, as listed by /commands
        request: Parameter overrides and numerical overrides

    Returns:
        Dict containing the command name and the emitted records
    """
    if command not in CommandRegistry.names():
        raise HTTPException(status_code=404, detail=f"Unknown command: {command}")
    try:
        spec = RunSpec(
            command=command,
            params=request.params,
            format="json",
            dim_override=request.dim_override,
            tol_override=request.tol_override,
        )
        records = CommandRegistry.run(spec)
    except CatLabError as e:
        logger.error(f"Error running {command}: {e}")
        raise HTTPException(status_code=500, detail={"code": e.code, "message": str(e)})
    except (ValueError, KeyError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    return {"command": command, "records": [_finite(record) for record in records]}


def _finite(record: Dict[str, Any]) -> Dict[str, Any]:
    """JSON has no infinities; log10 of a zero probability becomes null."""
    return {
        key: None if isinstance(value, float) and not math.isfinite(value) else value
        for key, value in record.items()
    }
