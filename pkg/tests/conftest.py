import functools
import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from swathplan.geom import Polygon  # noqa: E402
from swathplan.pipeline import run_pipeline  # noqa: E402
from swathplan.scenario import Scenario, bundled_names, load_bundled  # noqa: E402

FLEET_SIZES = (3, 4, 6, 8, 10)


@functools.lru_cache(maxsize=None)
def bundled_run(name, n_robots=None, coverage=False):
    sc = load_bundled(name, n_robots=n_robots)
    return run_pipeline(sc, with_coverage=coverage)


def rect_scenario(n_robots=1, depot=(0.0, 0.0), **kw):
    roi = Polygon([(0, 0), (100, 0), (100, 50), (0, 50)])
    return Scenario("rect100x50", roi, (), swath_width=10.0, buffer_scale=0.0, n_robots=n_robots,
                    depot=depot, orientation="mar", **kw)


@pytest.fixture(scope="session")
def scenario_names():
    return bundled_names()


@pytest.fixture
def unit_square():
    return Polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance results, printed once more at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
