import numpy as np
import pytest

from globenv import ArgGrid, CurveSet


def rand_set(rng, s, d, obs_count=0, integers=False):
    """Random curve set; integer values force plenty of rank ties."""
    if integers:
        values = rng.integers(0, 8, size=(s, d)).astype(float)
    else:
        values = rng.normal(size=(s, d))
    return CurveSet(ArgGrid.default(d), values, obs_count)


@pytest.fixture(scope="session")
def growth_sets():
    from globenv.datasets import growth_curve_sets

    return growth_curve_sets()
