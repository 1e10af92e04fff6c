import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

from nadyn.measure import make_measure  # noqa: E402
from nadyn.zoo import zoo_system  # noqa: E402


@pytest.fixture(scope="session")
def cat5():
    return zoo_system("cat", q=5)


@pytest.fixture(scope="session")
def cat7():
    return zoo_system("cat", q=7)


@pytest.fixture(scope="session")
def uniform25(cat5):
    return make_measure(cat5.space)
