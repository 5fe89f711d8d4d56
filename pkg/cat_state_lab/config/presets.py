from typing import Any, Dict, List
import math

from ..models import BackactionParams, DetectorModel, KerrMaterial


class PresetRegistry:
    """Named parameter sets quoted for materials, detectors and reference experiments."""

    MATERIALS: Dict[str, Dict[str, Any]] = {
        "fused_silica": {
            "name": "fused_silica",
            "n2": 2.6e-20,
            "a_eff": 7e-12,
            "t_pulse": 1e-15,
            "wavelength": 1550e-9,
            "loss_db_per_km": 0.2,
            "group_index": 1.45,
            "loss_convention": "quoted",
            "quoted_ratio": 260.0,
        },
        "chalcogenide": {
            "name": "chalcogenide",
            "n2": 2e-18,
            "a_eff": 7e-12,
            "t_pulse": 1e-15,
            "wavelength": 1550e-9,
            "loss_db_per_km": 100.0,
            "group_index": 2.4,
            "loss_convention": "quoted",
            "quoted_ratio": 1.3e4,
        },
    }

    DETECTORS: Dict[str, Dict[str, float]] = {
        "ideal": {"eta": 1.0, "dark_mean": 0.0},
        "apd": {"eta": 0.8, "dark_mean": 4e-4},
        "tes": {"eta": 0.88, "dark_mean": 1e-8},
        "experiment_1": {"eta": 0.8, "dark_mean": 5e-4},
        "experiment_2": {"eta": 0.9, "dark_mean": 2e-4},
    }

    # Rows m = 2, 4, 6, 8 for the even cat with alpha = 2
    BACKACTION_TABLES: Dict[int, Dict[str, Any]] = {
        1: {
            "variant": "song",
            "rows": [
                {"m": 2, "fidelity": 0.9709, "probability": 0.110, "r": 1.14, "s": -1.35, "T": 0.808},
                {"m": 4, "fidelity": 0.9978, "probability": 0.056, "r": 1.44, "s": -1.48, "T": 0.710},
                {"m": 6, "fidelity": 0.9995, "probability": 0.038, "r": 1.61, "s": -1.63, "T": 0.652},
                {"m": 8, "fidelity": 0.9998, "probability": 0.029, "r": 1.76, "s": -1.77, "T": 0.616},
            ],
        },
        2: {
            "variant": "improved",
            "rows": [
                {"m": 2, "fidelity": 0.9709, "probability": 0.110, "r": -0.263, "s": -1.36, "T": 0.972},
                {"m": 4, "fidelity": 0.9978, "probability": 0.056, "r": -0.271, "s": -1.41, "T": 1.0},
                {"m": 6, "fidelity": 0.9995, "probability": 0.0017, "r": -0.162, "s": -0.62, "T": 1.0},
                {"m": 8, "fidelity": 0.9998, "probability": 0.000016, "r": -0.116, "s": -0.45, "T": 1.0},
            ],
        },
        3: {
            "variant": "simplified",
            "rows": [
                {"m": 2, "fidelity": 0.9709, "probability": 0.110, "r": 0.263, "s": -1.62, "T": 0.665},
                {"m": 4, "fidelity": 0.9978, "probability": 0.056, "r": 0.274, "s": -1.76, "T": 0.497},
                {"m": 6, "fidelity": 0.9995, "probability": 0.038, "r": 0.221, "s": -1.85, "T": 0.398},
                {"m": 8, "fidelity": 0.9998, "probability": 0.029, "r": 0.182, "s": -1.93, "T": 0.332},
            ],
        },
    }

    TRADEOFF_POINTS: Dict[str, Dict[str, Any]] = {
        "song_low_squeezing": {"variant": "song", "r": 0.00235, "s": -0.588, "T": 0.999999, "m": 2, "probability": 4e-11},
        "song_compromise": {"variant": "song", "r": 0.074, "s": -0.593, "T": 0.999, "m": 2, "probability": 4e-5},
        "improved_low_squeezing": {"variant": "improved", "r": -0.0009, "s": -0.589, "T": 0.547, "m": 2, "probability": 1.01e-6},
        "simplified_low_squeezing": {"variant": "simplified", "r": -0.590, "s": 0.0010, "T": 0.9975, "m": 2, "probability": 1.3e-6},
    }

    SUBTRACTION_EXPERIMENTS: Dict[str, Dict[str, Any]] = {
        "experiment_1": {
            "nu": 0.85, "detector": "experiment_1", "m": 1, "T": 0.922, "r": -0.514,
            "alpha": 1.25, "parity": "-",
            "quoted": {"fidelity": 0.727, "probability": 0.0143, "vx_db": 4.2, "vp_db": -3.5},
        },
        "experiment_2": {
            "nu": 0.95, "detector": "experiment_2", "m": 2, "T": 0.982, "r": -0.722,
            "alpha": 2.0, "parity": "+",
            "quoted": {"fidelity": 0.737, "probability": 0.00021, "vx_db": 6.11, "vp_db": -5.62},
        },
    }

    KINDS = ("material", "detector", "table", "tradeoff", "experiment")

    @classmethod
    def _section(cls, kind: str) -> Dict[Any, Any]:
        sections = {
            "material": cls.MATERIALS,
            "detector": cls.DETECTORS,
            "table": cls.BACKACTION_TABLES,
            "tradeoff": cls.TRADEOFF_POINTS,
            "experiment": cls.SUBTRACTION_EXPERIMENTS,
        }
        if kind not in sections:
            raise ValueError(f"Unknown preset kind: {kind}")
        return sections[kind]

    @classmethod
    def get(cls, kind: str, name: Any) -> Dict[str, Any]:
        """Get the raw preset ``name`` of the given kind."""
        section = cls._section(kind)
        if name not in section:
            raise ValueError(f"Unknown {kind} preset: {name}")
        return section[name]

    @classmethod
    def names(cls, kind: str) -> List[Any]:
        return list(cls._section(kind))

    @classmethod
    def material(cls, name: str) -> KerrMaterial:
        return KerrMaterial(**cls.get("material", name))

    @classmethod
    def detector(cls, name: str) -> DetectorModel:
        return DetectorModel(**cls.get("detector", name))

    @classmethod
    def tradeoff(cls, name: str) -> BackactionParams:
        point = cls.get("tradeoff", name)
        return BackactionParams(**{k: point[k] for k in ("variant", "r", "s", "T", "m")})

    @classmethod
    def listing(cls) -> List[Dict[str, Any]]:
        """Flat rows describing every preset, for the ``presets`` command."""
        rows = []
        for kind in cls.KINDS:
            for name, value in cls._section(kind).items():
                rows.append({"kind": kind, "name": str(name), "value": _describe(value)})
        return rows


def _describe(value: Dict[str, Any]) -> str:
    parts = []
    for key, item in value.items():
        if isinstance(item, (list, dict)):
            parts.append(f"{key}=<{len(item)}>")
        elif isinstance(item, float) and item != 0 and abs(math.log10(abs(item))) > 3:
            parts.append(f"{key}={item:.3e}")
        else:
            parts.append(f"{key}={item}")
    return " ".join(parts)
