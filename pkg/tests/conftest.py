import math

import numpy as np
import pytest

from brwcrit import ModelParams, beta_critical, find_spectral_solution

# acceptance outcomes, filled in by test_acceptance and printed at the end
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


def random_supercritical(rng, count, n_max=8, min_lambda=0.05):
    """Supercritical parameter sets with a leading eigenvalue of at least ``min_lambda``."""
    out = []
    while len(out) < count:
        kappa, b0 = np.exp(rng.uniform(math.log(0.2), math.log(5.0), 2))
        n = int(rng.integers(1, n_max + 1))
        beta = beta_critical(n, kappa, b0) + rng.uniform(0.2, 3.0)
        params = ModelParams.with_beta(kappa, b0, n, beta)
        sol = find_spectral_solution(params)
        if sol is not None and sol.lam >= min_lambda:
            out.append((params, sol))
    return out


@pytest.fixture
def unit_params():
    """kappa = b0 = 1, one absorber pair, source intensity 1."""
    return ModelParams.with_beta(1.0, 1.0, 1, 1.0)
