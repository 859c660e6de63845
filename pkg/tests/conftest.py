import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pseudowronskian import identity, make_exp_cos, solve_pipeline

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def exp_cos():
    return make_exp_cos()


@pytest.fixture(scope="session")
def exp_cos_solution(exp_cos):
    """Contraction solve for the exp-cos coefficient, w = x, c = 1, eta = 1."""
    return solve_pipeline(exp_cos, identity(), 1.0, 1.0, n_wanted=5, witness_t_max=30.0, horizon=60.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
