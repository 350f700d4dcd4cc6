"""EM parameter learning for networks observed through noisy sensors.

The hidden discrete layer is never observed directly; each experiment
provides one continuous reading per node. The E-step turns readings into
per-node emission likelihood vectors and computes, for every node, the
posterior of the node jointly with its parents given all readings. The
M-step row-normalizes those posterior masses summed over experiments,
exactly the closed-form update for a multinomial CPT.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import InitializationError
from .inference import _family_tables_batch, partition_function
from .network import LOG_FLOOR, Network, NetworkSpec, validate
from .sensors import SensorModel


@dataclass
class EmConfig:
    """Stopping rule and initialization for one EM run.

    The run stops when the RMS difference between consecutive full
    parameter vectors drops below ``tol`` (computed over all CPT entries)
    or after ``max_iters`` iterations. ``init`` is "dirichlet" (each CPT
    row drawn from a flat Dirichlet) or "uniform"; when ``init_seed`` is
    set it overrides the generator passed to :func:`run_em` for the draw.
    """

    tol: float = 1e-3
    max_iters: int = 100
    init: str = "dirichlet"
    init_seed: int | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.init not in ("dirichlet", "uniform"):
            raise ValueError(f"unknown init mode {self.init!r}")


@dataclass(frozen=True)
class FamilyPosterior:
    """Per-experiment posterior family tables.

    ``tables[i]`` has shape (experiments, parent_configs_i, r_i); each
    (experiment, node) slice sums to 1.
    """

    tables: tuple

    @property
    def n_experiments(self) -> int:
        return self.tables[0].shape[0]


@dataclass
class EmTrace:
    """Per-iteration log-likelihood and parameter-change record."""

    loglik: list = field(default_factory=list)
    rms_change: list = field(default_factory=list)
    status: str = "max_iterations"
    final_loglik: float = float("nan")

    @property
    def iterations(self) -> int:
        return len(self.loglik)


def scaled_evidence(sensors: SensorModel, data: Dataset):
    """Emission likelihood vectors per node, rescaled for stable products.

    Each (K, r_i) likelihood matrix is divided by its per-experiment max;
    the dropped log-scale adds back into the observed log-likelihood.
    Returns (columns, per-experiment log-scale array).
    """
    k = data.n_experiments
    cols = []
    logscale = np.zeros(k)
    for i in range(sensors.n_nodes):
        lik = sensors.emission_matrix(i, data.readings[:, i])
        peak = lik.max(axis=1)
        with np.errstate(divide="ignore"):
            logscale += np.log(np.maximum(peak, LOG_FLOOR))
        safe = np.where(peak > 0.0, peak, 1.0)
        cols.append(lik / safe[:, None])
    return cols, logscale


def _check_shapes(spec: NetworkSpec, sensors: SensorModel, data: Dataset):
    if sensors.n_nodes != spec.n_nodes:
        raise InitializationError(
            f"sensor model covers {sensors.n_nodes} nodes, spec has {spec.n_nodes}"
        )
    for i, r in enumerate(spec.cardinalities):
        if sensors.cardinality(i) != r:
            raise InitializationError(
                f"node {spec.names[i]}: sensor has {sensors.cardinality(i)} "
                f"means, spec cardinality is {r}"
            )
    if data.n_nodes != spec.n_nodes:
        raise InitializationError(
            f"dataset has {data.n_nodes} columns, spec has {spec.n_nodes} nodes"
        )


def e_step(net: Network, sensors: SensorModel, data: Dataset) -> FamilyPosterior:
    """Posterior family tables for every experiment under the current CPTs."""
    _check_shapes(net.spec, sensors, data)
    cols, _ = scaled_evidence(sensors, data)
    tables, _ = _family_tables_batch(net, cols)
    return FamilyPosterior(tables=tuple(tables))


def m_step(posteriors: FamilyPosterior, spec: NetworkSpec):
    """Closed-form CPT update from accumulated family posteriors.

    Each row is the posterior mass summed over experiments and normalized
    across the node's values; rows with zero total mass become uniform.
    Returns one table per node.
    """
    out = []
    for i in range(spec.n_nodes):
        counts = posteriors.tables[i].sum(axis=0)      # (configs, r_i)
        out.append(_normalize_rows(counts, spec.cardinalities[i]))
    return out


def _normalize_rows(counts: np.ndarray, r: int) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    table = np.where(totals > 0.0, counts / np.where(totals > 0.0, totals, 1.0), 1.0 / r)
    return table


def observed_loglik(
    net: Network, sensors: SensorModel, data: Dataset, method: str = "eliminate"
) -> float:
    """Log probability of the readings with hidden values marginalized out."""
    _check_shapes(net.spec, sensors, data)
    cols, logscale = scaled_evidence(sensors, data)
    z = partition_function(net, cols, method=method)
    return float(np.sum(np.log(np.maximum(z, LOG_FLOOR)) + logscale))


def init_cpts(spec: NetworkSpec, config: EmConfig, rng: np.random.Generator):
    if config.init_seed is not None:
        rng = np.random.default_rng(config.init_seed)
    tables = []
    for i, r in enumerate(spec.cardinalities):
        rows = spec.n_parent_configs(i)
        if config.init == "uniform":
            tables.append(np.full((rows, r), 1.0 / r))
        else:
            tables.append(rng.dirichlet(np.ones(r), size=rows))
    return tables


def run_em(
    spec: NetworkSpec,
    sensors: SensorModel,
    data: Dataset,
    config: EmConfig | None = None,
    rng: np.random.Generator | None = None,
):
    """Alternate E and M steps until the parameters stop moving.

    Returns (learned Network, EmTrace). The trace records, per iteration,
    the observed-data log-likelihood of the parameters entering that
    iteration and the RMS change the update produced; ``final_loglik`` is
    evaluated at the returned parameters.
    """
    config = config or EmConfig()
    rng = rng if rng is not None else np.random.default_rng()
    _check_shapes(spec, sensors, data)

    cols, logscale = scaled_evidence(sensors, data)
    logscale_sum = float(logscale.sum())
    cpts = init_cpts(spec, config, rng)
    net = validate(spec, cpts)
    trace = EmTrace()

    for _ in range(config.max_iters):
        tables, z = _family_tables_batch(net, cols)
        ll = float(np.sum(np.log(np.maximum(z, LOG_FLOOR)))) + logscale_sum
        new_cpts = m_step(FamilyPosterior(tables=tuple(tables)), spec)
        rms = _rms_diff(cpts, new_cpts)
        trace.loglik.append(ll)
        trace.rms_change.append(rms)
        cpts = new_cpts
        net = validate(spec, cpts)
        if rms < config.tol:
            trace.status = "converged"
            break

    trace.final_loglik = observed_loglik(net, sensors, data)
    return net, trace


def _rms_diff(old, new) -> float:
    num = 0.0
    count = 0
    for a, b in zip(old, new):
        d = b - a
        num += float((d * d).sum())
        count += d.size
    return float(np.sqrt(num / count))
