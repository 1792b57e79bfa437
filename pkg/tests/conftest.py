import numpy as np
import pytest

from fracvolt import ExponentialWeight, StandardWeight, TailExprWeight, TaylorSeries


@pytest.fixture(scope="session")
def std1():
    return StandardWeight(1.0)


@pytest.fixture(scope="session")
def std2():
    return StandardWeight(2.0)


@pytest.fixture(scope="session")
def exp_weight():
    return ExponentialWeight(1.0, 1.0)


@pytest.fixture(scope="session")
def slow_tail_weight():
    # tail 1/(1 + log(1/(1-r))): slowly varying, the lower-doubling failure
    return TailExprWeight("1/(1+log(1/(1-r)))")


def random_polynomial(rng, degree, complex_coeffs=True):
    c = rng.standard_normal(degree + 1)
    if complex_coeffs:
        c = c + 1j * rng.standard_normal(degree + 1)
    c = c / np.linalg.norm(c)
    return TaylorSeries.from_coeffs(c)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240813)
