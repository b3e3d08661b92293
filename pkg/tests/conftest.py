import numpy as np
import pytest
from hypothesis import settings

from finslercheck.metrics import builtin
from finslercheck.sampling import SampleSpec, sample_domain

settings.register_profile("suite", derandomize=True, max_examples=40, deadline=None)
settings.load_profile("suite")


BALL_METRICS = ("klein", "funk", "berwald")
CLASSIC_METRICS = ("klein", "funk", "berwald", "spherical", "bryant")


def make_metric(name, **params):
    if name == "bryant" and not params:
        params = {"alpha": np.pi / 6}
    return builtin(name, **params)


@pytest.fixture(scope="session")
def metrics_zoo():
    zoo = {name: make_metric(name) for name in ("euclidean",) + CLASSIC_METRICS}
    return zoo


_SAMPLE_CACHE = {}


def samples_for(metric, n=2, count=60, seed=7):
    key = (metric.name, tuple(sorted(metric.params.items())), n, count, seed)
    if key not in _SAMPLE_CACHE:
        spec = SampleSpec.for_metric(n=n, count=count, seed=seed, domain_radius=metric.domain_radius)
        _SAMPLE_CACHE[key] = sample_domain(spec)
    return _SAMPLE_CACHE[key]
