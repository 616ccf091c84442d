import numpy as np
import pytest

from drlqc import DrSettings, build_grid, builtin_problem, dr_solve


@pytest.fixture(scope="session")
def bench():
    """Session cache of benchmark solves keyed by (name, case, n, gamma, eps,
    max_iter); returns (spec, grid, solution, lam_dr, report)."""
    cache = {}

    def solve(name, case, n_steps, gamma=None, eps=1e-8, max_iter=200):
        key = (name, case, n_steps, gamma, eps, max_iter)
        if key not in cache:
            spec, preset = builtin_problem(name, case)
            grid = build_grid(spec.t0, spec.tf, n_steps)
            settings = DrSettings(
                preset if gamma is None else gamma, eps, max_iter
            )
            cache[key] = (spec, grid) + dr_solve(spec, grid, settings)
        return cache[key]

    return solve


@pytest.fixture()
def rng():
    return np.random.default_rng(20240814)
