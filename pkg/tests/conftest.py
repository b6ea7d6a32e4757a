import itertools

import numpy as np
import pytest

from rigsplit import BlendshapeModel


def random_model(n=4, m=3, seed=0):
    rng = np.random.default_rng(seed)
    return BlendshapeModel(neutral=rng.normal(size=3 * n),
                           blendshapes=rng.normal(size=(3 * n, m)),
                           controller_names=tuple(f"c{i}" for i in range(m)))


def best_two_partition(values):
    """Exhaustive minimum within-cluster SSE over every 2-partition of the points."""
    X = np.atleast_2d(np.asarray(values, dtype=float))
    if X.shape[0] == 1:
        X = X.T
    N = X.shape[0]
    best = (np.inf, None)
    # fix point 0 in group A to skip mirrored duplicates
    for mask in itertools.product([0, 1], repeat=N - 1):
        labels = np.array((0,) + mask)
        if labels.all() or not labels.any():
            continue
        sse = 0.0
        for g in (0, 1):
            pts = X[labels == g]
            sse += float(((pts - pts.mean(axis=0)) ** 2).sum())
        if sse < best[0]:
            best = (sse, labels)
    return best


@pytest.fixture
def model():
    return random_model()
