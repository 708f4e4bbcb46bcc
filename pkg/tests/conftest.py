import numpy as np
import pytest

from terrafilter import ScenarioConfig, synthesize


@pytest.fixture(scope="session")
def benchmark_trace_outliers():
    return synthesize(ScenarioConfig(name="terrain_outliers", seed=0))


@pytest.fixture(scope="session")
def benchmark_trace_clean():
    return synthesize(
        ScenarioConfig(name="terrain_clean", outlier_fraction=0.0, seed=0)
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
