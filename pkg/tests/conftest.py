import pytest
from hypothesis import settings

from locallimit import dist

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def gaussian():
    return dist.make_family("gaussian")


@pytest.fixture(scope="session")
def uniform():
    return dist.make_family("uniform_sym")


@pytest.fixture(scope="session")
def expc():
    return dist.make_family("exp_centered")
