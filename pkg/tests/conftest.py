import numpy as np
import pytest

from nbodycc import SolverConfig, census, charged, newtonian
from nbodycc.cc_solver import random_seed_configuration

EPS = np.finfo(float).eps
FD_STEP = EPS ** (1.0 / 3.0)


def fd_gradient(f, q, h=None):
    """Central-difference gradient of a scalar function of an (n, d) array."""
    q = np.asarray(q, dtype=float)
    h = FD_STEP * max(1.0, float(np.abs(q).max())) if h is None else h
    g = np.zeros_like(q)
    for idx in np.ndindex(q.shape):
        qp = q.copy()
        qm = q.copy()
        qp[idx] += h
        qm[idx] -= h
        g[idx] = (f(qp) - f(qm)) / (2.0 * h)
    return g


def fd_jacobian(f, x, h=None):
    """Central-difference Jacobian of a vector function of a flat array."""
    x = np.asarray(x, dtype=float)
    h = FD_STEP * max(1.0, float(np.abs(x).max())) if h is None else h
    cols = []
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(f(xp)) - np.asarray(f(xm))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def random_configuration(rng, n, d, masses=None):
    m = np.ones(n) if masses is None else masses
    return random_seed_configuration(n, d, m, rng)


def random_potential(rng, n, kind="newtonian"):
    if kind == "newtonian":
        return newtonian(rng.uniform(0.5, 2.0, n))
    gamma = rng.uniform(-0.9, 0.9, n)
    return charged(gamma, masses=rng.uniform(0.5, 2.0, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


class CensusBank:
    """Session cache of multistart censuses shared across test modules."""

    def __init__(self):
        self._cache = {}

    def get(self, n, d, masses_kind="equal", n_starts=50):
        key = (n, d, masses_kind, n_starts)
        if key not in self._cache:
            if masses_kind == "equal":
                m = np.ones(n)
            else:
                m = np.random.default_rng(1000 * n + d).uniform(0.5, 2.0, n)
            potential = newtonian(m)
            cfg = SolverConfig(rng_seed=424242, n_starts=n_starts)
            self._cache[key] = (potential, census(potential, d, cfg))
        return self._cache[key]


@pytest.fixture(scope="session")
def census_bank():
    return CensusBank()
