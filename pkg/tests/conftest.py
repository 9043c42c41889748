import numpy as np
import pytest

from mcsfa import make_lattice, make_linear, uniform_policy, induce_chain, value_iteration


@pytest.fixture(scope="session")
def linear_200_90():
    env = make_linear(200, 90)
    return env, value_iteration(env, 0.95)


@pytest.fixture(scope="session")
def lattice_20_corner():
    env = make_lattice(20, 20, (0, 0))
    return env, value_iteration(env, 0.95)


@pytest.fixture()
def uniform_linear_3():
    env = make_linear(3, 2)
    P = induce_chain(env, uniform_policy(env))
    return env, P


def assert_rows_stochastic(P: np.ndarray, tol: float = 1e-12) -> None:
    assert np.all(P >= 0)
    assert np.max(np.abs(P.sum(axis=1) - 1.0)) <= tol
