"""Pydantic records shared by the schemes, the CLI and the API."""
from typing import Any, Dict, List, Optional
import json
import math
import logging

from pydantic import BaseModel, Field, validator, root_validator

from . import __version__

logger = logging.getLogger(__name__)


def log10_probability(p: Optional[float]) -> float:
    """log10 of a probability; -inf when it vanishes."""
    return math.log10(p) if p and p > 0 else float("-inf")


class DetectorModel(BaseModel):
    """Photon counter with efficiency ``eta`` and mean dark counts per event ``dark_mean``."""
    eta: float = Field(1.0, ge=0.0, le=1.0, description="Detection efficiency")
    dark_mean: float = Field(0.0, ge=0.0, description="Mean dark counts per detection event")

    class Config:
        allow_mutation = False

    @property
    def is_ideal(self) -> bool:
        return self.eta == 1.0 and self.dark_mean == 0.0


class KerrMaterial(BaseModel):
    """Kerr medium. ``gamma`` and ``chi`` may be given directly or derived from the optional fields."""
    name: str = "custom"
    gamma: Optional[float] = Field(None, ge=0.0, description="Photon loss rate (1/s)")
    chi: Optional[float] = Field(None, gt=0.0, description="Nonlinear strength (1/s)")
    n2: Optional[float] = Field(None, description="Nonlinear index (m^2/W)")
    a_eff: Optional[float] = Field(None, gt=0.0, description="Effective mode area (m^2)")
    t_pulse: Optional[float] = Field(None, gt=0.0, description="Pulse duration (s)")
    omega: Optional[float] = Field(None, gt=0.0, description="Angular frequency (1/s)")
    wavelength: Optional[float] = Field(None, gt=0.0, description="Vacuum wavelength (m)")
    loss_db_per_km: Optional[float] = Field(None, ge=0.0)
    group_index: float = Field(1.45, gt=0.0)
    loss_convention: str = Field("physical", description="physical or quoted dB conversion")
    quoted_ratio: Optional[float] = None

    @validator("loss_convention")
    def check_convention(cls, v):
        if v not in ("physical", "quoted"):
            raise ValueError(f"Unknown loss convention: {v}")
        return v


class BackactionParams(BaseModel):
    variant: str
    r: float
    s: float
    T: float = Field(..., ge=0.0, le=1.0)
    m: int = Field(..., ge=0)

    @validator("variant")
    def check_variant(cls, v):
        if v not in ("song", "improved", "simplified"):
            raise ValueError(f"Unknown back-action variant: {v}")
        return v


class SubtractionConfig(BaseModel):
    lam: float = Field(..., gt=-1.0, lt=1.0, description="Squeezing parameter lambda = -tanh r")
    T: float = Field(..., ge=0.0, le=1.0)
    m: int = Field(..., ge=0)
    nu: float = Field(1.0, ge=0.0, le=1.0, description="Squeezed-state purity transmissivity")
    det: DetectorModel = DetectorModel()
    dim: Optional[int] = Field(None, gt=1)


class GrowthConfig(BaseModel):
    alpha: float = Field(..., gt=0.0)
    beta: float = Field(..., gt=0.0)
    phi: float = math.pi
    varphi: float = math.pi
    det: DetectorModel = DetectorModel()
    fock_cutoff: Optional[int] = Field(None, gt=0)

    @property
    def amplitude(self) -> float:
        return math.hypot(self.alpha, self.beta)

    @property
    def gamma(self) -> float:
        return 2.0 * self.alpha * self.beta / self.amplitude


class SchemeReport(BaseModel):
    """Fidelity and success probability of one scheme evaluation."""
    fidelity: float = Field(..., ge=0.0, le=1.0 + 1e-9)
    probability: float = Field(..., ge=0.0)
    log10_probability: Optional[float] = None
    params: Dict[str, Any] = {}
    target: Dict[str, Any] = {}
    notes: List[str] = []

    @root_validator(pre=True)
    def fill_log_probability(cls, values):
        if values.get("log10_probability") is None:
            values["log10_probability"] = log10_probability(values.get("probability", 0.0))
        fid = values.get("fidelity")
        if fid is not None:
            values["fidelity"] = min(max(float(fid), 0.0), 1.0)
        return values

    def to_record(self) -> Dict[str, Any]:
        """Flat row for tabular output."""
        record: Dict[str, Any] = {}
        for key, value in self.params.items():
            record[key] = value
        for key, value in self.target.items():
            record[f"target_{key}"] = value
        record["fidelity"] = self.fidelity
        record["probability"] = self.probability
        record["log10_probability"] = self.log10_probability
        record["notes"] = "; ".join(self.notes)
        return record


class RunSpec(BaseModel):
    command: str
    params: Dict[str, Any] = {}
    output: Optional[str] = None
    format: str = "csv"
    dim_override: Optional[int] = None
    tol_override: Optional[float] = None

    @validator("format")
    def check_format(cls, v):
        if v not in ("csv", "json"):
            raise ValueError(f"Unknown output format: {v}")
        return v

    def provenance(self) -> Dict[str, Any]:
        return {
            "tool_version": f"cat_state_lab {__version__}",
            "params_json": json.dumps(self.params, sort_keys=True, default=str),
        }
