import pytest

from annulus_flux import build_grid


@pytest.fixture(scope="session")
def grid():
    """Default working grid on the (1, 2) annulus."""
    return build_grid(32, 16, 1.0, 2.0)


@pytest.fixture(scope="session")
def fine_grid():
    return build_grid(32, 64, 1.0, 2.0)

