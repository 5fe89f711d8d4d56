import pytest

from cat_state_lab.config.presets import PresetRegistry
from cat_state_lab.models import DetectorModel


@pytest.fixture
def ideal_detector():
    return DetectorModel()


@pytest.fixture
def apd():
    return PresetRegistry.detector("apd")


@pytest.fixture
def tes():
    return PresetRegistry.detector("tes")


@pytest.fixture
def small_dim():
    return 30
