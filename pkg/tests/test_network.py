import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affbn import (
    Cpt,
    CycleDetected,
    NetworkSpec,
    NotNormalized,
    ShapeMismatch,
    UnknownNode,
    ancestral_sample,
    joint_log_prob,
    sample_assignments,
    validate,
)
from conftest import random_network


def chain_spec():
    return NetworkSpec(nodes=(("A", 2), ("B", 2)), arcs=(("A", "B"),))


def test_validate_two_node_chain_dof():
    net = validate(chain_spec(), [[[0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]])
    assert net.degrees_of_freedom() == 3
    assert net.topo_order == (0, 1)


def test_two_cycle_rejected():
    with pytest.raises(CycleDetected):
        NetworkSpec(nodes=(("A", 2), ("B", 2)), arcs=(("A", "B"), ("B", "A")))


def test_seven_node_sparse_net_dof_is_ten():
    nodes = tuple((f"X{i}", 2) for i in range(1, 8))
    spec = NetworkSpec(nodes=nodes, arcs=(("X1", "X7"), ("X2", "X7")))
    assert spec.degrees_of_freedom() == 10


def test_unknown_arc_endpoint():
    with pytest.raises(UnknownNode):
        NetworkSpec(nodes=(("A", 2),), arcs=(("A", "Z"),))


def test_duplicate_and_self_arcs_rejected():
    with pytest.raises(ValueError):
        NetworkSpec(nodes=(("A", 2), ("B", 2)), arcs=(("A", "B"), ("A", "B")))
    with pytest.raises(ValueError):
        NetworkSpec(nodes=(("A", 2),), arcs=(("A", "A"),))


def test_validate_shape_and_normalization_errors():
    spec = chain_spec()
    with pytest.raises(ShapeMismatch):
        validate(spec, [[[0.5, 0.5]], [[0.5, 0.5]]])      # B needs two rows
    with pytest.raises(NotNormalized):
        validate(spec, [[[0.6, 0.5]], [[0.5, 0.5], [0.5, 0.5]]])
    with pytest.raises(NotNormalized):
        validate(spec, [[[1.2, -0.2]], [[0.5, 0.5], [0.5, 0.5]]])
    with pytest.raises(ShapeMismatch):
        validate(spec, [Cpt(0, [[0.5, 0.5]])])            # missing node


def test_validate_accepts_cpt_objects_out_of_order():
    spec = chain_spec()
    net = validate(
        spec, [Cpt(1, [[0.9, 0.1], [0.2, 0.8]]), Cpt(0, [[0.3, 0.7]])]
    )
    assert net.cpt(0)[0, 1] == 0.7


def test_parent_config_indexing_first_parent_most_significant():
    spec = NetworkSpec(
        nodes=(("P", 3), ("Q", 2), ("C", 2)),
        arcs=(("P", "C"), ("Q", "C")),
    )
    # row index = p * card(Q) + q
    assert spec.parent_config_index(2, [2, 1, 0]) == 5
    assert spec.parent_config_index(2, [1, 0, 0]) == 2


def test_joint_log_prob_uniform_independent():
    nodes = tuple((f"U{i}", 2) for i in range(3))
    net = validate(NetworkSpec(nodes=nodes), [[[0.5, 0.5]]] * 3)
    assert joint_log_prob(net, [0, 1, 0]) == pytest.approx(np.log(1 / 8))


def test_joint_log_prob_chain_product():
    net = validate(
        chain_spec(),
        [[[0.7, 0.3]], [[0.9, 0.1], [0.1, 0.9]]],
    )
    assert joint_log_prob(net, [1, 1]) == pytest.approx(np.log(0.3 * 0.9))


def test_joint_log_prob_zero_factor_is_minus_inf():
    net = validate(chain_spec(), [[[1.0, 0.0]], [[0.5, 0.5], [0.5, 0.5]]])
    assert joint_log_prob(net, [1, 0]) == -np.inf


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_joint_log_prob_sums_to_one(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, max_nodes=5, max_card=3)
    cards = net.spec.cardinalities
    total = sum(
        np.exp(joint_log_prob(net, a)) for a in itertools.product(*map(range, cards))
    )
    assert total == pytest.approx(1.0, abs=1e-9)


def test_deterministic_cpts_sample_their_encoding(rng):
    spec = NetworkSpec(
        nodes=(("A", 2), ("B", 3)),
        arcs=(("A", "B"),),
    )
    net = validate(spec, [[[0.0, 1.0]], [[1, 0, 0], [0, 0, 1.0]]])
    for _ in range(10):
        assert ancestral_sample(net, rng).tolist() == [1, 2]


def test_uniform_marginals_law_of_large_numbers(rng):
    nodes = (("A", 2), ("B", 2))
    net = validate(NetworkSpec(nodes=nodes), [[[0.5, 0.5]], [[0.5, 0.5]]])
    draws = sample_assignments(net, 100_000, rng)
    assert np.abs(draws.mean(axis=0) - 0.5).max() < 0.01


def test_sampler_matches_joint_chi_square():
    # seven binary nodes, two arcs into one sink, random CPTs; a million
    # draws should be consistent with the analytic joint
    from scipy.stats import chisquare

    rng = np.random.default_rng(99)
    nodes = tuple((f"X{i}", 2) for i in range(1, 8))
    spec = NetworkSpec(nodes=nodes, arcs=(("X1", "X7"), ("X2", "X7")))
    cpts = [
        rng.dirichlet(np.ones(2), size=spec.n_parent_configs(i)) for i in range(7)
    ]
    net = validate(spec, cpts)

    n = 1_000_000
    draws = sample_assignments(net, n, rng)
    flat = np.zeros(n, dtype=np.int64)
    for j in range(7):
        flat = flat * 2 + draws[:, j]
    observed = np.bincount(flat, minlength=128).astype(float)

    probs = np.array(
        [
            np.exp(joint_log_prob(net, a))
            for a in itertools.product(*(range(2) for _ in range(7)))
        ]
    )
    expected = probs * n
    # merge rare cells so the chi-square approximation is sound
    keep = expected >= 5
    observed = np.append(observed[keep], observed[~keep].sum())
    expected = np.append(expected[keep], expected[~keep].sum())
    if expected[-1] == 0:
        observed, expected = observed[:-1], expected[:-1]
    stat = chisquare(observed, expected * observed.sum() / expected.sum())
    assert stat.pvalue > 0.001


def test_parameter_vector_is_readonly_and_consistent(rng):
    net = random_network(rng)
    vec = net.parameter_vector()
    assert vec.size == sum(t.size for t in net.cpts)
    with pytest.raises(ValueError):
        net.cpts[0][0, 0] = 0.5
