import pytest

from hardysim import HardyParams, SourceParams
from hardysim.detection import DetectorModel


@pytest.fixture
def ideal_params() -> HardyParams:
    return HardyParams()


@pytest.fixture
def ideal_detectors() -> DetectorModel:
    return DetectorModel()


def params_with_p(p: float) -> HardyParams:
    return HardyParams(source=SourceParams(p_disting=p))
