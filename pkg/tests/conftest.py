import numpy as np
import pytest

import artifact as af


@pytest.fixture(scope="session")
def grid_n1():
    return af.build_grid(1, 1025, 16.0)


@pytest.fixture(scope="session")
def soliton_profile(grid_n1):
    return af.find_nodal_solution(grid_n1, 1)


@pytest.fixture(scope="session")
def grid_h2():
    return af.build_grid(2, 1025, 30.0)


@pytest.fixture(scope="session")
def profile_h2(grid_h2):
    return af.compute_c_infinity(grid_h2, 2)


@pytest.fixture(scope="session")
def assignment_h2():
    return af.build_assignment((1, 2))


@pytest.fixture(scope="session")
def guess_h2(profile_h2, assignment_h2):
    return af.initial_guess(profile_h2, assignment_h2)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
