"""End-to-end simulation benchmark: soft EM against hard discretization.

One trial draws a ground-truth network, synthesizes a database of sensor
readings from it, hands the identical data to both learners, and scores
each learned parameter set by RMS distance to the truth. Trials are
seeded through independent substreams, so results are reproducible for a
given master seed regardless of worker count or completion order.
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

import numpy as np

from .baseline import count_mle, discretize, uniform_priors
from .data import Dataset, DiscretizedDataset, ensure_dir
from .em import EmConfig, observed_loglik, run_em
from .errors import ConfigError, SpecMismatch
from .inference import node_marginals
from .network import Network, NetworkSpec, validate
from .sensors import SensorModel, evenly_spaced_sensors
from .serialize import load_model, model_from_dict

COMPLEX_RESOURCE = "resources/complex_net.json"
SIMPLE_SINK = "X7"
TRIALS_FILE = "trials.csv"
JOURNAL_FILE = "trials_journal.csv"
SUMMARY_CSV = "summary.csv"
SUMMARY_JSON = "summary.json"

_TRIAL_COLUMNS = (
    "algorithm",
    "size",
    "rep",
    "rms_error",
    "final_loglik",
    "iterations",
    "wall_time",
)


@dataclass
class ExperimentConfig:
    """One benchmark campaign: a network template swept over sizes and reps."""

    network: str = "simple"            # simple | complex | path to a model doc
    sigma: float = 1.0
    sizes: tuple = (300, 3000)
    repetitions: int = 30
    seed: int = 0
    em: EmConfig = field(default_factory=EmConfig)
    out_dir: str | None = None
    map_prior: str = "marginal"        # marginal | uniform
    action_sigma: float | None = None
    jobs: int | None = None
    write_traces: bool = True
    algorithms: tuple = ("em", "discrete")

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.algorithms = tuple(self.algorithms)
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("database sizes must be at least 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.map_prior not in ("marginal", "uniform"):
            raise ValueError(f"unknown map_prior {self.map_prior!r}")
        if not self.algorithms or any(
            a not in ("em", "discrete") for a in self.algorithms
        ):
            raise ValueError("algorithms must be a nonempty subset of em/discrete")


@dataclass(frozen=True)
class TrialResult:
    algorithm: str
    size: int
    rep: int
    rms_error: float
    final_loglik: float
    iterations: int
    wall_time: float


def _draw_cpts(spec: NetworkSpec, rng: np.random.Generator):
    return [
        rng.dirichlet(np.ones(r), size=spec.n_parent_configs(i))
        for i, r in enumerate(spec.cardinalities)
    ]


def make_simple_network(rng, sigma: float = 1.0):
    """Seven binary nodes, two arcs feeding one sink; 10 free parameters."""
    names = [f"X{i + 1}" for i in range(7)]
    spec = NetworkSpec(
        nodes=tuple((n, 2) for n in names),
        arcs=(("X1", SIMPLE_SINK), ("X2", SIMPLE_SINK)),
    )
    assert spec.degrees_of_freedom() == 10
    net = validate(spec, _draw_cpts(spec, rng))
    return net, evenly_spaced_sensors(spec.cardinalities, sigma)


def complex_network_spec() -> NetworkSpec:
    """The frozen 8-node benchmark topology, checked against its contract."""
    text = (
        importlib_resources.files("affbn")
        .joinpath(COMPLEX_RESOURCE)
        .read_text()
    )
    spec = model_from_dict(json.loads(text)).spec
    if spec.n_nodes != 8:
        raise ConfigError(f"complex template has {spec.n_nodes} nodes, wanted 8")
    if len(spec.arcs) != 10:
        raise ConfigError(f"complex template has {len(spec.arcs)} arcs, wanted 10")
    if not all(2 <= r <= 4 for r in spec.cardinalities):
        raise ConfigError("complex template cardinalities must lie in [2, 4]")
    if spec.degrees_of_freedom() != 125:
        raise ConfigError(
            f"complex template has {spec.degrees_of_freedom()} free parameters, wanted 125"
        )
    return spec


def make_complex_network(rng, sigma: float = 3.0, action_sigma: float | None = None):
    """Eight nodes, ten arcs, cardinalities 2..4; 125 free parameters."""
    spec = complex_network_spec()
    net = validate(spec, _draw_cpts(spec, rng))
    sigmas = [sigma] * spec.n_nodes
    if action_sigma is not None:
        sigmas[spec.index("Action")] = action_sigma
    sensors = evenly_spaced_sensors(spec.cardinalities, sigmas)
    return net, sensors


def _template(config: ExperimentConfig, rng: np.random.Generator):
    if config.network == "simple":
        return make_simple_network(rng, sigma=config.sigma)
    if config.network == "complex":
        return make_complex_network(
            rng, sigma=config.sigma, action_sigma=config.action_sigma
        )
    doc = load_model(config.network)
    spec = doc.spec
    net = doc.network() if doc.cpts is not None else validate(spec, _draw_cpts(spec, rng))
    sensors = doc.sensors or evenly_spaced_sensors(spec.cardinalities, config.sigma)
    return net, sensors


def synthesize_dataset(net: Network, sensors: SensorModel, k: int, rng):
    """Sample K experiments; returns (readings, ground-truth values).

    The truth is kept for evaluation only and is never shown to a learner.
    """
    if k < 1:
        raise ValueError("need at least one experiment")
    from .network import sample_assignments

    values = sample_assignments(net, k, rng)
    readings = sensors.sample_readings(values, rng)
    truth = DiscretizedDataset(values, net.spec.cardinalities, net.spec.names)
    return Dataset(readings), truth


def rms_error(learned: Network, truth: Network) -> float:
    """Root mean square difference over all CPT entries."""
    if learned.spec != truth.spec:
        raise SpecMismatch("networks must share one spec")
    d = learned.parameter_vector() - truth.parameter_vector()
    return float(np.sqrt(np.mean(d * d)))


def _trial_seed(seed: int, rep: int, stream: int, size_index: int = 0):
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(rep, stream, size_index))
    )


def run_trial(config: ExperimentConfig, rep: int, size_index: int):
    """The configured learners on one freshly synthesized database.

    Both algorithms see the identical readings (paired comparison).
    Returns (results, em trace rows). Fully determined by (config, rep,
    size_index); wall times are the only nondeterministic fields.
    """
    size = config.sizes[size_index]
    truth_net, sensors = _template(config, _trial_seed(config.seed, rep, 0))
    data, _ = synthesize_dataset(
        truth_net, sensors, size, _trial_seed(config.seed, rep, 1, size_index)
    )
    spec = truth_net.spec
    results = []
    trace_rows = []

    if "em" in config.algorithms:
        t0 = time.perf_counter()
        em_net, trace = run_em(
            spec, sensors, data, config.em, _trial_seed(config.seed, rep, 2, size_index)
        )
        em_wall = time.perf_counter() - t0
        _check_trace(trace, rep, size)
        results.append(
            TrialResult(
                algorithm="em",
                size=size,
                rep=rep,
                rms_error=rms_error(em_net, truth_net),
                final_loglik=trace.final_loglik,
                iterations=trace.iterations,
                wall_time=em_wall,
            )
        )
        trace_rows = list(zip(trace.loglik, trace.rms_change))

    if "discrete" in config.algorithms:
        t0 = time.perf_counter()
        if config.map_prior == "marginal":
            priors = node_marginals(truth_net)
        else:
            priors = uniform_priors(spec.cardinalities)
        hard = discretize(sensors, priors, data)
        disc_net = count_mle(hard, spec)
        disc_wall = time.perf_counter() - t0
        results.append(
            TrialResult(
                algorithm="discrete",
                size=size,
                rep=rep,
                rms_error=rms_error(disc_net, truth_net),
                final_loglik=observed_loglik(disc_net, sensors, data),
                iterations=0,
                wall_time=disc_wall,
            )
        )
    return results, trace_rows


def _check_trace(trace, rep: int, size: int):
    ll = trace.loglik + [trace.final_loglik]
    drops = np.diff(ll)
    if len(drops) and drops.min() < -1e-9:
        raise RuntimeError(
            f"log-likelihood decreased by {-drops.min():.3g} "
            f"(rep {rep}, size {size}); EM update is broken"
        )


def _worker(args):
    config, rep, size_index = args
    return rep, size_index, run_trial(config, rep, size_index)


def _read_journal(path: Path, n_algorithms: int = 2):
    """Completed (rep, size) cells from a previous interrupted run.

    Rows are deduplicated on (rep, size, algorithm), last write wins; a
    cell counts as done only when every configured algorithm is present.
    """
    if not path.exists():
        return {}
    rows = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            r = TrialResult(
                algorithm=row["algorithm"],
                size=int(row["size"]),
                rep=int(row["rep"]),
                rms_error=float(row["rms_error"]),
                final_loglik=float(row["final_loglik"]),
                iterations=int(row["iterations"]),
                wall_time=float(row["wall_time"]),
            )
            rows[(r.rep, r.size, r.algorithm)] = r
    done = {}
    for (rep, size, _), r in rows.items():
        done.setdefault((rep, size), []).append(r)
    return {k: v for k, v in done.items() if len(v) == n_algorithms}


def _result_row(r: TrialResult):
    return [
        r.algorithm,
        r.size,
        r.rep,
        repr(r.rms_error),
        repr(r.final_loglik),
        r.iterations,
        repr(r.wall_time),
    ]


def run_suite(config: ExperimentConfig):
    """Run every (repetition, size) cell and return sorted TrialResults.

    With an output directory set, finished trials are journaled as they
    complete, an interrupted run resumes from the journal, and the final
    sorted table plus summaries and per-trial EM traces are written there.
    """
    out = ensure_dir(config.out_dir) if config.out_dir else None
    journal_path = out / JOURNAL_FILE if out else None
    done = (
        _read_journal(journal_path, len(config.algorithms)) if journal_path else {}
    )

    tasks = [
        (rep, si)
        for si in range(len(config.sizes))
        for rep in range(config.repetitions)
        if (rep, config.sizes[si]) not in done
    ]

    journal = None
    writer = None
    if journal_path:
        fresh = not journal_path.exists()
        journal = open(journal_path, "a", newline="")
        writer = csv.writer(journal)
        if fresh:
            writer.writerow(_TRIAL_COLUMNS)

    results = [r for pair in done.values() for r in pair]
    trace_dir = None
    if out and config.write_traces:
        trace_dir = ensure_dir(out / "traces")

    def record(rep, si, trial_results, trace_rows):
        results.extend(trial_results)
        if writer:
            for r in trial_results:
                writer.writerow(_result_row(r))
            journal.flush()
        if trace_dir is not None and trace_rows:
            size = config.sizes[si]
            _write_trace(trace_dir / f"em_k{size}_rep{rep:02d}.csv", trace_rows)

    try:
        if config.jobs == 1 or len(tasks) <= 1:
            for rep, si in tasks:
                trial_results, trace_rows = run_trial(config, rep, si)
                record(rep, si, trial_results, trace_rows)
        else:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                futures = [
                    pool.submit(_worker, (config, rep, si)) for rep, si in tasks
                ]
                for fut in as_completed(futures):
                    rep, si, (trial_results, trace_rows) = fut.result()
                    record(rep, si, trial_results, trace_rows)
    finally:
        if journal:
            journal.close()

    results.sort(key=lambda r: (r.size, r.rep, r.algorithm))
    if out:
        _write_trials(out / TRIALS_FILE, results)
        summary = summarize(results)
        save_summary(out, summary, config)
    return results


def _write_trials(path, results):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_TRIAL_COLUMNS)
        for r in results:
            w.writerow(_result_row(r))


def _write_trace(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "loglik", "rms_change"])
        for it, (ll, rms) in enumerate(rows, start=1):
            w.writerow([it, repr(ll), repr(rms)])


@dataclass(frozen=True)
class SummaryCell:
    size: int
    algorithm: str
    count: int
    median: float
    q1: float
    q3: float


def _quartiles(values):
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25.0, 50.0, 75.0])
    return float(med), float(q1), float(q3)


def summarize(results):
    """Median and quartiles of RMS error per (size, algorithm) cell, plus
    the median reduction of EM relative to the hard baseline per size.

    The reduction is (1 - median_em / median_discrete) x 100.
    """
    if not results:
        raise ValueError("no results to summarize")
    cells = {}
    for r in results:
        cells.setdefault((r.size, r.algorithm), []).append(r.rms_error)
    table = []
    for (size, algo), vals in sorted(cells.items()):
        med, q1, q3 = _quartiles(vals)
        table.append(
            SummaryCell(size=size, algorithm=algo, count=len(vals), median=med, q1=q1, q3=q3)
        )
    reductions = {}
    sizes = sorted({r.size for r in results})
    for size in sizes:
        em = cells.get((size, "em"))
        disc = cells.get((size, "discrete"))
        if em and disc:
            med_em, _, _ = _quartiles(em)
            med_disc, _, _ = _quartiles(disc)
            if med_disc > 0:
                reductions[size] = (1.0 - med_em / med_disc) * 100.0
    return table, reductions


def save_summary(out_dir, summary, config: ExperimentConfig):
    table, reductions = summary
    out = Path(out_dir)
    with open(out / SUMMARY_CSV, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["size", "algorithm", "count", "rms_median", "rms_q1", "rms_q3"])
        for c in table:
            w.writerow([c.size, c.algorithm, c.count, repr(c.median), repr(c.q1), repr(c.q3)])
    doc = {
        "config": {
            "network": config.network,
            "sigma": config.sigma,
            "sizes": list(config.sizes),
            "repetitions": config.repetitions,
            "seed": config.seed,
            "map_prior": config.map_prior,
            "em": {"tol": config.em.tol, "max_iters": config.em.max_iters,
                   "init": config.em.init},
        },
        "cells": [
            {
                "size": c.size,
                "algorithm": c.algorithm,
                "count": c.count,
                "rms_median": c.median,
                "rms_q1": c.q1,
                "rms_q3": c.q3,
            }
            for c in table
        ],
        "median_reduction_pct": {str(k): v for k, v in sorted(reductions.items())},
    }
    (out / SUMMARY_JSON).write_text(json.dumps(doc, indent=2) + "\n")
