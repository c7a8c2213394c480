import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240810)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: full acceptance-criteria checks (slower)"
    )
