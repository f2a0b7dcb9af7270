"""Shared fixtures: the expensive solver runs and root cascades are computed
once per session and reused by the module tests and the acceptance suite."""

import time

import numpy as np
import pytest

from rootflow import densities as dn
from rootflow import pde_solver as ps
from rootflow import poly_dynamics as pd


@pytest.fixture(scope="session")
def semicircle_run():
    """Semicircle(T=1) solved to t=0.5 at the default resolution."""
    params = ps.SolverParams()
    initial = ps.state_from_family(dn.Semicircle(1.0), 0.0, params)
    start = time.perf_counter()
    traj = ps.run(initial, 0.5, params, snapshot_times=[0.1, 0.25, 0.5])
    elapsed = time.perf_counter() - start
    return params, traj, elapsed


@pytest.fixture(scope="session")
def mp_run():
    """MarchenkoPastur(c=1) solved to t=0.5 at the default resolution."""
    params = ps.SolverParams()
    initial = ps.state_from_family(dn.MarchenkoPastur(1.0), 0.0, params)
    start = time.perf_counter()
    traj = ps.run(initial, 0.5, params, snapshot_times=[0.1, 0.25, 0.5])
    elapsed = time.perf_counter() - start
    return params, traj, elapsed


def _cascade(family, n, k):
    config = family.sample_roots(0.0, n)
    current = config
    for _ in range(k):
        current = pd.differentiate_once(current)
    return current


@pytest.fixture(scope="session")
def semicircle_cascade_2000():
    """n=2000 semicircle roots after k=1000 derivatives, with wall time."""
    start = time.perf_counter()
    final = _cascade(dn.Semicircle(1.0), 2000, 1000)
    return final, time.perf_counter() - start


@pytest.fixture(scope="session")
def semicircle_cascade_4000():
    start = time.perf_counter()
    final = _cascade(dn.Semicircle(1.0), 4000, 2000)
    return final, time.perf_counter() - start


@pytest.fixture(scope="session")
def mp_cascade_2000():
    start = time.perf_counter()
    final = _cascade(dn.MarchenkoPastur(1.0), 2000, 1000)
    return final, time.perf_counter() - start
