import numpy as np
import pytest

from fieldred import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test on both kernel paths; restores the default afterwards."""
    old = kernels.USE_NUMBA
    if request.param == "numba" and not kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    kernels.use_numba(request.param == "numba")
    yield request.param
    kernels.use_numba(old)
