import math

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

LN2 = math.log(2.0)
LAMBDA_M = math.log(1.0 + 1.0 / math.sqrt(2.0))


@pytest.fixture
def x_peak():
    return 2.0 * LN2
