import sys
from pathlib import Path

import pytest

# make tests/oracles.py and tests/factories.py importable as plain modules
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def bee_model():
    from modelprobe import fixtures

    return fixtures.load_fixture("bee")


@pytest.fixture
def and_model():
    from modelprobe import fixtures

    return fixtures.load_fixture("and")
