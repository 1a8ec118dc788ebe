import pytest

from stochastic_string.core import StringParams


@pytest.fixture
def params():
    return StringParams(alpha_prime=0.5, dims=26, mode_cutoff=6)


@pytest.fixture
def small_params():
    return StringParams(alpha_prime=0.5, dims=4, mode_cutoff=3)
