from .settings import SimulationConfig
from .presets import PresetRegistry

__all__ = ["SimulationConfig", "PresetRegistry"]
