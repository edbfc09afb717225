import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "backend"))

import config  # noqa: E402
from states import PartitionSpec, example2_state, w_state  # noqa: E402


@pytest.fixture
def w3():
    return w_state()

@pytest.fixture
def example2():
    return example2_state()

@pytest.fixture
def part3():
    return PartitionSpec.default(3)

@pytest.fixture(autouse=True)
def restore_tolerances():
    saved = {name: getattr(config, name) for name in ("ENTANGLED_TOL", "SLACK", "GRID_STEP")}
    yield
    for name, value in saved.items():
        setattr(config, name, value)
