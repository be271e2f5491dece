import zlib

import numpy as np
import pytest


@pytest.fixture
def rng(request):
    # stable per-test stream
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))
