import numpy as np
import pytest

from jumpmart.measure_sim import JumpModel, Normal, PowerLawLevy, Uniform


@pytest.fixture
def uniform_model():
    return JumpModel.finite(2.0, Uniform(-1.0, 1.0))


@pytest.fixture
def normal_model():
    return JumpModel.finite(2.0, Normal(0.0, 1.0))


@pytest.fixture
def levy15():
    return JumpModel.infinite(PowerLawLevy(1.5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
