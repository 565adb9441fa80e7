import logging

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from edgesched.ingest import GridSpec, synthetic_orders
from edgesched.instances import t3
from edgesched.model import Regime, ifloor

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

logging.getLogger("edgesched").setLevel(logging.ERROR)


@pytest.fixture
def t3_instance():
    return t3()


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture(scope="session")
def city_orders():
    """Synthetic stand-in for the sampled city order log (66 days)."""
    return synthetic_orders(130_000, seed=7, spec=GridSpec())


@pytest.fixture(scope="session")
def orders_csv(tmp_path_factory, city_orders):
    from edgesched.ingest import write_orders

    path = tmp_path_factory.mktemp("orders") / "orders.csv"
    write_orders(city_orders, path)
    return path


def floyd_warshall(n, links):
    """Textbook O(n^3) reference, independent of scipy's Dijkstra."""
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for l in links:
        a, b = l.a - 1, l.b - 1
        d[a, b] = d[b, a] = min(d[a, b], l.length)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i, k] + d[k, j] < d[i, j]:
                    d[i, j] = d[i, k] + d[k, j]
    return d


def regime_truth(inst):
    """Regime guards recomputed from first principles."""
    p = inst.profile
    chi = [min(int(t), ifloor(p.W)) for t in inst.theta]
    pu = 0
    for i, c in enumerate(chi):
        if inst.placement[i]:
            pu += max(0, ifloor(c - p.beta * inst.theta[i]))
        else:
            pu += c
    cloud = pu > inst.m * ifloor((1 - p.alpha) * p.K)
    comm = any(int(t) > p.W for t in inst.theta)
    return {
        Regime.SKSW: not cloud and not comm,
        Regime.IKSW: cloud and not comm,
        Regime.SKIW: not cloud and comm,
        Regime.IKIW: cloud and comm,
    }
