import os

import pytest
from hypothesis import HealthCheck, settings

from commvar.exactfield import QQ, FieldSpec

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("COMMVAR_HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

SMALL_P = FieldSpec.prime(1000003)
BIG_P = FieldSpec.prime()


@pytest.fixture(params=["Q", "Fp"], ids=["Q", "Fp"])
def field(request):
    return QQ if request.param == "Q" else SMALL_P
