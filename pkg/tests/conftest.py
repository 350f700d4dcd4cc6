import numpy as np
import pytest

from affbn import NetworkSpec, validate
from affbn.sensors import evenly_spaced_sensors


def random_spec(rng, max_nodes=8, max_card=4, max_joint=None, arc_prob=0.35):
    """Random DAG spec; arcs always point from lower to higher index."""
    n = int(rng.integers(2, max_nodes + 1))
    while True:
        cards = rng.integers(2, max_card + 1, size=n)
        if max_joint is None or np.prod(cards.astype(float)) <= max_joint:
            break
    arcs = []
    names = [f"N{i}" for i in range(n)]
    for j in range(1, n):
        for i in range(j):
            if rng.random() < arc_prob:
                arcs.append((names[i], names[j]))
    return NetworkSpec(
        nodes=tuple((names[i], int(cards[i])) for i in range(n)),
        arcs=tuple(arcs),
    )


def random_network(rng, **kwargs):
    spec = random_spec(rng, **kwargs)
    cpts = [
        rng.dirichlet(np.ones(r), size=spec.n_parent_configs(i))
        for i, r in enumerate(spec.cardinalities)
    ]
    return validate(spec, cpts)


def random_evidence(rng, spec):
    """Positive unnormalized likelihood vectors, one per node."""
    return [rng.random(r) + 0.05 for r in spec.cardinalities]


def random_instance(rng, k=40, sigma_lo=0.5, sigma_hi=4.0, **kwargs):
    """(network, sensors, dataset) triple for end-to-end learner tests."""
    from affbn import synthesize_dataset

    net = random_network(rng, **kwargs)
    sigma = float(rng.uniform(sigma_lo, sigma_hi))
    sensors = evenly_spaced_sensors(net.spec.cardinalities, sigma)
    data, truth = synthesize_dataset(net, sensors, k, rng)
    return net, sensors, data, truth


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
