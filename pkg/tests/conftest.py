import pytest
from hypothesis import HealthCheck, settings

from simplexmap._backend import BACKENDS, HAVE_NUMBA, use_backend

settings.register_profile(
    "default", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(params=[b for b in BACKENDS if HAVE_NUMBA or b == "numpy"])
def backend(request):
    with use_backend(request.param):
        yield request.param
