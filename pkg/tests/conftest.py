import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("HYPOTHESIS_MAX_EXAMPLES", "1000")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def golden_result():
    from intent_assure.loop import run_scenario
    from intent_assure.scenario import load_scenario

    return run_scenario(load_scenario("paper-usecase"))
