import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings


# Run from a checkout without installing
sys.path.insert(0, str(Path(__file__).parent.parent))
os.environ.setdefault("REKS_ENVIRONMENT", "test")

settings.register_profile(
    "reks",
    derandomize=True,
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "reks"))


@pytest.fixture
def c2():
    from reks.equivariance import FiniteGroup

    return FiniteGroup.cyclic(2)


@pytest.fixture
def s3():
    from reks.equivariance import FiniteGroup

    return FiniteGroup.preset("S3")
