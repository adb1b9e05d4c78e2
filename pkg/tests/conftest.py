import numpy as np
import pytest

from cqed_teleport import core
from cqed_teleport.config import DeviceParams
from cqed_teleport.scenario import DeviceConfig


@pytest.fixture
def device() -> DeviceParams:
    """Default device with decoherence and a 50 MHz Rabi drive on qubit 1."""
    return DeviceConfig().to_params()


@pytest.fixture
def closed_device(device: DeviceParams) -> DeviceParams:
    return device.closed()


@pytest.fixture
def rng() -> np.random.Generator:
    return core.make_rng(1234)
