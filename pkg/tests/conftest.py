import numpy as np
import pytest

from lpcompact import Constant, Family, Grid, GridFunction, WeightedSpace, sample


@pytest.fixture
def grid1d():
    # 8 cells on [-1, 1), h = 1/4
    return Grid(dim=1, box_level=0, cell_exp=-2)


@pytest.fixture
def grid2d():
    return Grid(dim=2, box_level=0, cell_exp=-2)


@pytest.fixture
def flat_space(grid1d):
    return WeightedSpace(2.0, sample(Constant(1.0), grid1d))


@pytest.fixture
def rng():
    return np.random.default_rng(99)


def random_family(grid, rng, n=3):
    members = tuple(GridFunction(grid, rng.standard_normal(grid.shape)) for _ in range(n))
    return Family(grid, members, tuple(f"r{i}" for i in range(n)))
