import os

import pytest
from hypothesis import HealthCheck, settings

from geocurrents.sgroup import get_presentation

settings.register_profile(
    "repo", deadline=None, max_examples=40, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


@pytest.fixture(scope="session")
def g2():
    return get_presentation("genus2")


@pytest.fixture(scope="session")
def fr():
    return get_presentation("free2")
