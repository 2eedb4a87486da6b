import pytest

from dacsolver.backends import ExactMockBackend
from dacsolver.core import SolverConfig


@pytest.fixture
def mock_backend():
    return ExactMockBackend()


@pytest.fixture
def config():
    return SolverConfig()
