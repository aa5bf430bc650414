import numpy as np
import pytest

from ldma.geometry import ArrayConfig


@pytest.fixture
def cfg257():
    """Half-wavelength 257-element ULA at 30 GHz (the workhorse setup)."""
    return ArrayConfig.half_wavelength(257, 30e9)


@pytest.fixture
def cfg65():
    return ArrayConfig.half_wavelength(65, 30e9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
