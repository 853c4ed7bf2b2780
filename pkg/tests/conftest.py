import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mgsp.synthetic import make_benchmark

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def benchmark():
    """Bundled synthetic scene, shared across the suite (read-only)."""
    cube, labels = make_benchmark()
    cube.setflags(write=False)
    labels.setflags(write=False)
    return cube, labels


@pytest.fixture(scope="session")
def small_scene():
    """A cheaper scene for CLI and pipeline smoke tests."""
    cube, labels = make_benchmark(height=18, width=18, bands=8, classes=3, tiles=3, seed=11)
    cube.setflags(write=False)
    labels.setflags(write=False)
    return cube, labels


def best_permutation_agreement(pred: np.ndarray, truth: np.ndarray) -> float:
    """Label agreement maximized over cluster-id permutations."""
    from itertools import permutations

    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    ids = np.unique(pred)
    best = 0.0
    for perm in permutations(np.unique(truth), ids.size):
        relabeled = np.empty_like(pred)
        for a, b in zip(ids, perm):
            relabeled[pred == a] = b
        best = max(best, float(np.mean(relabeled == truth)))
    return best
