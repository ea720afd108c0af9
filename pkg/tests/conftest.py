import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("cp3", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("cp3")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def rel(x, ref):
    ref = np.asarray(ref, dtype=float)
    return float(np.max(np.abs(np.asarray(x) - ref)) / np.max(np.abs(ref)))
