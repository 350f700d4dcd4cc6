import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affbn import (
    AllZeroLikelihood,
    EvidenceShapeMismatch,
    NetworkSpec,
    family_marginals,
    joint_log_prob,
    marginal,
    node_marginals,
    query,
    validate,
)
from affbn.sensors import shared_sigma_model
from conftest import random_evidence, random_network


def single_root(prior):
    spec = NetworkSpec(nodes=(("A", len(prior)),))
    return validate(spec, [[list(prior)]])


def brute_force_family_tables(net, evidence):
    """Independent oracle: enumerate the joint, weight by evidence,
    marginalize onto each (parents, node) block."""
    spec = net.spec
    cards = spec.cardinalities
    weights = {}
    for a in itertools.product(*map(range, cards)):
        w = np.exp(joint_log_prob(net, a))
        for i, vec in enumerate(evidence):
            w *= vec[a[i]]
        weights[a] = w
    z = sum(weights.values())
    tables = []
    for i in range(spec.n_nodes):
        t = np.zeros((spec.n_parent_configs(i), cards[i]))
        for a, w in weights.items():
            t[spec.parent_config_index(i, a), a[i]] += w
        tables.append(t / z)
    return tables


def test_uninformative_evidence_returns_prior():
    net = single_root([0.3, 0.7])
    (table,) = family_marginals(net, [[1.0, 1.0]])
    assert np.allclose(table, [[0.3, 0.7]])


def test_bayes_rule_on_symmetric_prior():
    net = single_root([0.5, 0.5])
    (table,) = family_marginals(net, [[0.9, 0.1]])
    assert np.allclose(table, [[0.9, 0.1]], atol=1e-12)


def test_family_tables_sum_to_one(rng):
    net = random_network(rng)
    tables = family_marginals(net, random_evidence(rng, net.spec))
    for t in tables:
        assert t.sum() == pytest.approx(1.0, abs=1e-9)


def test_seven_node_fast_path_equals_enumeration(rng):
    nodes = tuple((f"X{i}", 2) for i in range(1, 8))
    spec = NetworkSpec(nodes=nodes, arcs=(("X1", "X7"), ("X2", "X7")))
    cpts = [rng.dirichlet(np.ones(2), size=spec.n_parent_configs(i)) for i in range(7)]
    net = validate(spec, cpts)
    ev = random_evidence(rng, spec)
    fast = family_marginals(net, ev, method="eliminate")
    slow = family_marginals(net, ev, method="enumerate")
    oracle = brute_force_family_tables(net, ev)
    for f, s, o in zip(fast, slow, oracle):
        assert np.abs(f - s).max() < 1e-9
        assert np.abs(f - o).max() < 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_fast_path_equals_enumeration_on_random_dags(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, max_nodes=8, max_card=4, max_joint=2**16)
    ev = random_evidence(rng, net.spec)
    fast = family_marginals(net, ev, method="eliminate")
    slow = family_marginals(net, ev, method="enumerate")
    for f, s in zip(fast, slow):
        assert np.abs(f - s).max() < 1e-9


def test_evidence_shape_errors():
    net = single_root([0.5, 0.5])
    with pytest.raises(EvidenceShapeMismatch):
        family_marginals(net, [])
    with pytest.raises(EvidenceShapeMismatch):
        family_marginals(net, [[0.5, 0.5, 0.5]])


def test_all_zero_likelihood_raises():
    net = single_root([0.5, 0.5])
    with pytest.raises(AllZeroLikelihood):
        family_marginals(net, [[0.0, 0.0]])


def test_zero_evidence_on_zero_prior_configuration():
    # evidence kills value 1, prior kills value 0: nothing is left
    net = single_root([1.0, 0.0])
    with pytest.raises(AllZeroLikelihood):
        family_marginals(net, [[0.0, 1.0]])


def test_marginal_without_evidence_is_prior(rng):
    net = random_network(rng, max_nodes=6, max_card=3)
    for i, prior in enumerate(node_marginals(net)):
        by_enum = marginal(net, (i,), method="enumerate")
        assert np.abs(prior - by_enum).max() < 1e-9
        assert prior.sum() == pytest.approx(1.0, abs=1e-9)


def test_marginal_axis_order_follows_targets(rng):
    net = random_network(rng, max_nodes=5, max_card=3)
    a, b = 0, net.spec.n_nodes - 1
    ab = marginal(net, (a, b))
    ba = marginal(net, (b, a))
    assert np.allclose(ab, ba.T, atol=1e-12)


def two_node_sensor_setup():
    spec = NetworkSpec(nodes=(("Cause", 2), ("Effect", 2)), arcs=(("Cause", "Effect"),))
    net = validate(spec, [[[0.4, 0.6]], [[0.8, 0.2], [0.3, 0.7]]])
    sensors = shared_sigma_model([[0.0, 5.0], [0.0, 5.0]], 1.0)
    return net, sensors


def test_query_no_readings_gives_prior_marginal():
    net, sensors = two_node_sensor_setup()
    post = query(net, sensors, {}, ("Cause",))
    assert np.allclose(post, [0.4, 0.6], atol=1e-9)


def test_query_sharp_readings_concentrate_on_generating_assignment():
    net, sensors = two_node_sensor_setup()
    sharp = shared_sigma_model([[0.0, 5.0], [0.0, 5.0]], 1e-9)
    post = query(net, sharp, {"Cause": 5.0, "Effect": 0.0}, ("Cause", "Effect"))
    assert post[1, 0] == pytest.approx(1.0, abs=1e-12)


def test_query_matches_brute_force_enumeration(rng):
    net, sensors = two_node_sensor_setup()
    x = 3.1
    post = query(net, sensors, {"Effect": x}, ("Cause",))
    # p(cause | effect reading) by direct summation
    lik = sensors.emission_likelihoods(1, x)
    joint = np.zeros(2)
    for c in range(2):
        for e in range(2):
            joint[c] += (
                np.exp(joint_log_prob(net, [c, e])) * lik[e]
            )
    assert np.allclose(post, joint / joint.sum(), atol=1e-12)
    by_enum = query(net, sensors, {"Effect": x}, ("Cause",), method="enumerate")
    assert np.allclose(post, by_enum, atol=1e-12)


def test_query_reading_on_target_is_extra_evidence():
    net, sensors = two_node_sensor_setup()
    post = query(net, sensors, {"Cause": 4.8}, ("Cause",))
    assert post[1] > 0.99


def test_batched_evidence_matches_per_experiment_loop(rng):
    net = random_network(rng, max_nodes=6, max_card=3)
    from affbn.inference import _as_evidence_batch, _family_tables_batch

    b = 7
    ev_batch = [rng.random((b, r)) + 0.05 for r in net.spec.cardinalities]
    tables, z = _family_tables_batch(net, _as_evidence_batch(net, ev_batch))
    for k in range(b):
        single = family_marginals(net, [col[k] for col in ev_batch])
        for i, t in enumerate(single):
            assert np.abs(tables[i][k] - t).max() < 1e-12
