import random
import zlib

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng(request):
    # deterministic per-test seed, stable across runs and processes
    return random.Random(zlib.crc32(request.node.nodeid.encode()))
