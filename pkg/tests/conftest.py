import numpy as np
import pytest

from qtreeib.envmodel import Environment, random_environment
from qtreeib.infotheory import compute_increments


def e4_environment() -> Environment:
    rel = np.zeros((4, 4))
    rel[:2, :2] = 1.0
    return Environment.uniform(rel)


@pytest.fixture
def e4():
    return e4_environment()


@pytest.fixture
def e4_inc(e4):
    return compute_increments(e4)


@pytest.fixture
def e4_csv(tmp_path):
    path = tmp_path / "e4.csv"
    path.write_text("1,1,0,0\n1,1,0,0\n0,0,0,0\n0,0,0,0\n")
    return path


def random_inc(ell, seed, nonuniform=False):
    return compute_increments(random_environment(ell, np.random.default_rng(seed), nonuniform_prior=nonuniform))
