import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def stderr_mean(xs):
    xs = np.asarray(xs, dtype=float)
    return xs.std(ddof=1, axis=0) / np.sqrt(xs.shape[0])
