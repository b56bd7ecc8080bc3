import numpy as np
import pytest

from fracschrod import Domain, Field, assemble, build_grid, c3_bump, sample_function
from fracschrod.grid import Region


@pytest.fixture(scope="session")
def op_fine():
    """s=0.5 on (-1,1), h=2^-8, R=8: the high-resolution reference operator."""
    grid = build_grid(Domain.interval(-1.0, 1.0), 2.0**-8, 8.0)
    return assemble(grid, 0.5)


@pytest.fixture(scope="session")
def op_medium():
    """s=0.5 on (-1,1), h=2^-6, R=4: workhorse for solver and study tests."""
    grid = build_grid(Domain.interval(-1.0, 1.0), 2.0**-6, 4.0)
    return assemble(grid, 0.5)


@pytest.fixture(scope="session")
def op_small():
    """s=0.5 on (-1,1), h=1/16, R=3: cheap operator for randomized trials."""
    grid = build_grid(Domain.interval(-1.0, 1.0), 1.0 / 16, 3.0)
    return assemble(grid, 0.5)


@pytest.fixture(scope="session")
def op_coarse():
    """s=0.5 on (-1,1), h=1/8, R=4: the recovery-scale operator."""
    grid = build_grid(Domain.interval(-1.0, 1.0), 1.0 / 8, 4.0)
    return assemble(grid, 0.5)


@pytest.fixture(scope="session")
def grid_2d():
    return build_grid(Domain.box((-1.0, -1.0), (1.0, 1.0)), 2.0**-3, 3.0)


def exterior_bump(grid, center, width, amplitude=1.0, mirrored=False) -> Field:
    """Sum of compactly supported bumps sampled on exterior nodes."""
    f = c3_bump(center, width, amplitude)
    field = sample_function(grid, f, Region.EXTERIOR)
    if mirrored:
        reflected = 2.0 * grid.domain.center - np.atleast_1d(center)
        f2 = c3_bump(reflected, width, amplitude)
        mirror = sample_function(grid, f2, Region.EXTERIOR)
        field = Field.from_values(grid, field.values + mirror.values)
    return field
