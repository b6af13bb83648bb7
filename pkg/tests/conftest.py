import numpy as np
import pytest

from odos.filtering import FilterConfig


@pytest.fixture
def small_config():
    """Cheap sweep configuration for unit tests."""
    return FilterConfig(length_L=3, spacing_set=(1,))


@pytest.fixture
def line_image():
    """Unit-intensity horizontal line through a 17x17 zero canvas."""
    img = np.zeros((17, 17))
    img[8, :] = 1.0
    return img


@pytest.fixture
def rng():
    return np.random.default_rng(20230817)
