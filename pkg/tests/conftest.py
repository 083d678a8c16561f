"""Shared fixtures: quadrature rules and the expensive trajectory/PDE runs.

The backward shoots and remainder integrations dominate the suite's wall
clock, so every horizon is computed once per session and shared between the
unit tests and the acceptance gate.  Grids of larger horizons extend the
grids of smaller ones, so Cauchy comparisons never interpolate.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from resonant_oscillator import (
    ChiTensor,
    RadialQuadrature,
    backward_shoot,
    construct_remainder,
    time_map,
)

S0 = 20.0
M_SCHEDULE = (1e3, 1e4, 1e5)
PDE_M = 1e3
PDE_MODES = 128


def shared_grids(s0: float, schedule) -> dict[float, np.ndarray]:
    grids = {}
    prev = None
    for m in schedule:
        if prev is None:
            grids[m] = np.geomspace(s0, m, max(1024, int(600 * math.log10(m / s0))))
        else:
            ext = np.geomspace(prev, m, max(512, int(600 * math.log10(m / prev))))
            grids[m] = np.concatenate([grids[prev], ext[1:]])
        prev = m
    return grids


@pytest.fixture(scope="session")
def rule30() -> RadialQuadrature:
    return RadialQuadrature.for_max_index(30)


@pytest.fixture(scope="session")
def rule64() -> RadialQuadrature:
    return RadialQuadrature.for_max_index(64)


@pytest.fixture(scope="session")
def chi24() -> ChiTensor:
    return ChiTensor.build(24)


@pytest.fixture(scope="session")
def chi64() -> ChiTensor:
    return ChiTensor.build(64)


@pytest.fixture(scope="session")
def traj_schedule():
    """Backward shoots for M in {1e3, 1e4, 1e5} on nested grids."""
    grids = shared_grids(S0, M_SCHEDULE)
    return {m: backward_shoot(m, S0, 1e-10, atol=1e-13, s_grid=g) for m, g in grids.items()}


@pytest.fixture(scope="session")
def traj_1e5_timed(traj_schedule):
    return time_map(traj_schedule[1e5])


@pytest.fixture(scope="session")
def traj_big():
    """The long shoot used for the slope fit over [1e3, 1e6]."""
    return time_map(backward_shoot(1e6, S0, 1e-10, atol=1e-12))


@pytest.fixture(scope="session")
def pde_grid():
    return np.geomspace(S0, PDE_M, 1024)


@pytest.fixture(scope="session")
def pde_grid_2m(pde_grid):
    return np.concatenate([pde_grid, np.geomspace(PDE_M, 2 * PDE_M, 256)[1:]])


@pytest.fixture(scope="session")
def pde_base(pde_grid):
    return construct_remainder(PDE_M, S0, n_modes=PDE_MODES, s_grid=pde_grid)


@pytest.fixture(scope="session")
def pde_2m(pde_grid_2m):
    return construct_remainder(2 * PDE_M, S0, n_modes=PDE_MODES, s_grid=pde_grid_2m)


@pytest.fixture(scope="session")
def pde_2k(pde_grid):
    return construct_remainder(PDE_M, S0, n_modes=2 * PDE_MODES, s_grid=pde_grid)


@pytest.fixture(scope="session")
def pde_growth():
    """Remainder run reaching past s = 10^3, for the physical growth identity."""
    return construct_remainder(4e3, S0, n_modes=PDE_MODES)
