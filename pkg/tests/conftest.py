import numpy as np
import pytest

from implift import linalg


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(params=sorted(linalg.available_backends()))
def backend(request):
    """Run the test once per kernel backend, restoring the default afterwards."""
    previous = linalg.current_backend()
    linalg.use_backend(request.param)
    yield request.param
    linalg.use_backend(previous)
