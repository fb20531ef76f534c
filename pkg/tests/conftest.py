import numpy as np
import pytest

import netcoh as nc

RING20_GAINS = nc.PGains(f=1.0, g=1.0, f0=1.0, g0=0.0)


@pytest.fixture(scope="session")
def ring20_p_ensemble():
    """20-seed empirical variance ensemble for ring(20,1) under P control.

    Expensive (minutes of simulated time); shared between the simulator
    property tests and the acceptance suite.
    """
    graph = nc.build_ring(20, 1.0)
    system = nc.assemble_p(graph, RING20_GAINS)
    horizon = 500.0 * nc.slowest_time_constant(system)
    cfg = nc.SimConfig(dt=nc.recommended_step(system), horizon=horizon, seed=0)
    values = nc.ensemble_variance(system, cfg, seeds=range(20))
    closed = nc.p_variance(nc.spectrum(graph), RING20_GAINS).v_n
    return np.asarray(values), closed


def random_connected_graph(rng, max_nodes=20):
    """Random member of the supported families plus random connected graphs."""
    family = rng.integers(0, 5)
    weight = float(rng.uniform(0.3, 2.0))
    if family == 0:
        return nc.build_path(int(rng.integers(2, max_nodes + 1)), weight)
    if family == 1:
        return nc.build_ring(int(rng.integers(3, max_nodes + 1)), weight)
    if family == 2:
        return nc.build_complete(int(rng.integers(2, max_nodes + 1)), weight)
    if family == 3:
        side = int(rng.integers(3, 5))
        dims = 2 if side == 4 else int(rng.integers(1, 3))
        return nc.build_torus(side, dims, weight)
    n = int(rng.integers(4, max_nodes + 1))
    edges = {(i, i + 1): float(rng.uniform(0.3, 2.0)) for i in range(1, n)}
    for _ in range(int(rng.integers(1, n))):
        i, j = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False))
        edges.setdefault((int(i), int(j)), float(rng.uniform(0.3, 2.0)))
    return nc.WeightedGraph(n, tuple((i, j, w) for (i, j), w in edges.items()))


def random_gains(rng, kind):
    u = lambda a, b: float(rng.uniform(a, b))
    if kind == "p":
        variant = int(rng.integers(0, 4))
        return nc.PGains(
            f=u(0.1, 3.0),
            g=u(0.1, 3.0),
            f0=0.0 if variant in (1, 3) else u(0.1, 3.0),
            g0=0.0 if variant in (2, 3) else u(0.1, 3.0),
        )
    if kind == "dapi":
        return nc.DapiGains(
            f=u(0.1, 3.0),
            g=0.0 if rng.random() < 0.3 else u(0.0, 2.0),
            g0=u(0.1, 3.0),
            k_i=u(0.1, 3.0),
            c=u(0.05, 2.0),
        )
    return nc.FdpdGains(
        f=u(0.0, 3.0),
        g=0.0 if rng.random() < 0.3 else u(0.0, 2.0),
        f0=u(0.1, 3.0),
        k_d=u(0.1, 3.0),
        tau=u(0.01, 2.0),
    )
