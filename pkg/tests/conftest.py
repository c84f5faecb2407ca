import pytest

from pdswave.domain import build_domain


@pytest.fixture(scope="session")
def the_domain():
    return build_domain()
