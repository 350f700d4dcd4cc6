"""Gaussian sensor models tying continuous readings to discrete values.

Each discrete node gets one continuous sensor child. Given the node's
value v, the sensor reading is normal with mean ``means[v]`` and standard
deviation ``sigmas[v]``. The benchmark networks use a sigma shared across
values of a node; a per-value sigma is accepted for generality.
"""

from dataclasses import dataclass

import numpy as np

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class SensorModel:
    """Per-node emission parameters: mean per discrete value, sigma > 0."""

    means: tuple
    sigmas: tuple

    def __post_init__(self):
        if len(self.sigmas) != len(self.means):
            raise ValueError("means and sigmas must cover the same nodes")
        ms, sg = [], []
        for i, mean_vec in enumerate(self.means):
            m = np.array(mean_vec, dtype=float)
            if m.ndim != 1 or m.size < 2:
                raise ValueError(f"node {i}: need one mean per discrete value")
            s = np.array(self.sigmas[i], dtype=float)
            if s.ndim == 0:
                s = np.full(m.size, float(s))
            if s.shape != m.shape:
                raise ValueError(f"node {i}: sigma shape {s.shape} != {m.shape}")
            if np.any(s <= 0.0) or not np.all(np.isfinite(s)):
                raise ValueError(f"node {i}: sigma must be positive and finite")
            m.setflags(write=False)
            s.setflags(write=False)
            ms.append(m)
            sg.append(s)
        object.__setattr__(self, "means", tuple(ms))
        object.__setattr__(self, "sigmas", tuple(sg))

    @property
    def n_nodes(self) -> int:
        return len(self.means)

    def cardinality(self, i: int) -> int:
        return self.means[i].size

    def emission_likelihoods(self, node: int, x: float) -> np.ndarray:
        """Density of reading ``x`` under each discrete value of ``node``."""
        m, s = self.means[node], self.sigmas[node]
        z = (x - m) / s
        return _INV_SQRT_2PI / s * np.exp(-0.5 * z * z)

    def emission_matrix(self, node: int, xs: np.ndarray) -> np.ndarray:
        """Vectorized emission likelihoods: (K,) readings -> (K, r) array."""
        m, s = self.means[node], self.sigmas[node]
        z = (np.asarray(xs, dtype=float)[:, None] - m[None, :]) / s[None, :]
        return _INV_SQRT_2PI / s[None, :] * np.exp(-0.5 * z * z)

    def sample_reading(self, node: int, v: int, rng: np.random.Generator) -> float:
        if not 0 <= v < self.cardinality(node):
            raise ValueError(f"value {v} out of range for node {node}")
        return float(rng.normal(self.means[node][v], self.sigmas[node][v]))

    def sample_readings(self, values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One reading per entry of a (K, n_nodes) assignment matrix."""
        values = np.asarray(values, dtype=int)
        out = np.empty(values.shape, dtype=float)
        for i in range(self.n_nodes):
            mu = self.means[i][values[:, i]]
            sd = self.sigmas[i][values[:, i]]
            out[:, i] = rng.normal(mu, sd)
        return out


def shared_sigma_model(means, sigma) -> SensorModel:
    """Sensor model with one sigma per node, shared across its values.

    ``sigma`` may be a scalar (same for every node) or a sequence with one
    entry per node.
    """
    means = [np.asarray(m, dtype=float) for m in means]
    if np.ndim(sigma) == 0:
        sigmas = [float(sigma)] * len(means)
    else:
        sigmas = [float(s) for s in sigma]
    return SensorModel(means=tuple(means), sigmas=tuple(sigmas))


def evenly_spaced_sensors(cardinalities, sigma, spacing: float = 5.0) -> SensorModel:
    """The benchmark emission model: value v reads near ``spacing * v``."""
    means = [spacing * np.arange(r, dtype=float) for r in cardinalities]
    return shared_sigma_model(means, sigma)


def _posterior(prior: np.ndarray, likes: np.ndarray) -> np.ndarray:
    w = prior * likes
    total = w.sum()
    if total <= 0.0:
        raise ValueError("prior and likelihood annihilate every value")
    return w / total


def responsibilities(model: SensorModel, prior, node: int, x: float) -> np.ndarray:
    """Soft assignment: normalized posterior over the node's values."""
    prior = np.asarray(prior, dtype=float)
    return _posterior(prior, model.emission_likelihoods(node, x))


def map_assign(model: SensorModel, prior, node: int, x: float) -> int:
    """Hard assignment: value maximizing likelihood x prior.

    Ties break toward the smaller value index.
    """
    prior = np.asarray(prior, dtype=float)
    scores = prior * model.emission_likelihoods(node, x)
    return int(np.argmax(scores))
