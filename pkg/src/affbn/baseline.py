"""The hard-assignment comparison learner.

Readings are first collapsed to their MAP value per node, then CPTs are
estimated by counting. A conjugate posterior-mean variant with Dirichlet
pseudo-counts is included; the benchmark comparison uses plain maximum
likelihood.
"""

import numpy as np

from .data import Dataset, DiscretizedDataset
from .em import FamilyPosterior
from .network import Network, NetworkSpec, validate
from .sensors import SensorModel


def discretize(sensors: SensorModel, priors, data: Dataset) -> DiscretizedDataset:
    """MAP-assign every reading: argmax over values of likelihood x prior.

    ``priors`` holds one normalized probability vector per node. Ties
    break toward the smaller value, matching the single-reading rule.
    """
    if len(priors) != sensors.n_nodes or data.n_nodes != sensors.n_nodes:
        raise ValueError("priors, sensors and data must cover the same nodes")
    cols = []
    for i in range(sensors.n_nodes):
        prior = np.asarray(priors[i], dtype=float)
        if prior.shape != (sensors.cardinality(i),):
            raise ValueError(f"prior for node {i} has wrong length")
        scores = sensors.emission_matrix(i, data.readings[:, i]) * prior[None, :]
        cols.append(np.argmax(scores, axis=1))
    cards = tuple(sensors.cardinality(i) for i in range(sensors.n_nodes))
    return DiscretizedDataset(np.stack(cols, axis=1), cards)


def uniform_priors(cardinalities):
    return [np.full(r, 1.0 / r) for r in cardinalities]


def _counts(data: DiscretizedDataset, spec: NetworkSpec, i: int) -> np.ndarray:
    rows = np.zeros(data.n_experiments, dtype=np.int64)
    for p in spec.parents(i):
        rows = rows * spec.cardinalities[p] + data.values[:, p]
    r = spec.cardinalities[i]
    flat = rows * r + data.values[:, i]
    n_rows = spec.n_parent_configs(i)
    return np.bincount(flat, minlength=n_rows * r).reshape(n_rows, r).astype(float)


def count_mle(data: DiscretizedDataset, spec: NetworkSpec) -> Network:
    """Empirical conditional frequencies; zero-count rows become uniform."""
    tables = []
    for i, r in enumerate(spec.cardinalities):
        counts = _counts(data, spec, i)
        totals = counts.sum(axis=1, keepdims=True)
        tables.append(
            np.where(totals > 0.0, counts / np.where(totals > 0.0, totals, 1.0), 1.0 / r)
        )
    return validate(spec, tables)


def count_bayes(data: DiscretizedDataset, spec: NetworkSpec, pseudo_count: float) -> Network:
    """Dirichlet posterior-mean estimate with a flat pseudo-count per cell."""
    if not pseudo_count > 0:
        raise ValueError("pseudo_count must be positive")
    tables = []
    for i, r in enumerate(spec.cardinalities):
        counts = _counts(data, spec, i) + pseudo_count
        tables.append(counts / counts.sum(axis=1, keepdims=True))
    return validate(spec, tables)


def one_hot_posteriors(data: DiscretizedDataset, spec: NetworkSpec) -> FamilyPosterior:
    """Family posteriors that put all mass on the observed configurations.

    Feeding these to the EM M-step reproduces :func:`count_mle` exactly,
    which is the cross-module consistency check for both.
    """
    k = data.n_experiments
    tables = []
    for i, r in enumerate(spec.cardinalities):
        rows = np.zeros(k, dtype=np.int64)
        for p in spec.parents(i):
            rows = rows * spec.cardinalities[p] + data.values[:, p]
        t = np.zeros((k, spec.n_parent_configs(i), r))
        t[np.arange(k), rows, data.values[:, i]] = 1.0
        tables.append(t)
    return FamilyPosterior(tables=tuple(tables))
