"""Dataset containers and their delimited-text round trips.

A training dataset is a (K, N) matrix of continuous sensor readings, one
row per experiment, one column per node. Discretized datasets hold the
corresponding integer values. Both serialize as CSV with a node-name
header; floats are written with repr so round trips are exact.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Continuous sensor readings, shape (experiments, nodes)."""

    readings: np.ndarray

    def __post_init__(self):
        r = np.array(self.readings, dtype=float)
        if r.ndim != 2:
            raise ValueError("readings must be a (experiments, nodes) matrix")
        if not np.all(np.isfinite(r)):
            raise ValueError("readings must be finite")
        r.setflags(write=False)
        object.__setattr__(self, "readings", r)

    @property
    def n_experiments(self) -> int:
        return self.readings.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.readings.shape[1]


@dataclass(frozen=True)
class DiscretizedDataset:
    """Hard-assigned discrete values, shape (experiments, nodes)."""

    values: np.ndarray
    cardinalities: tuple
    names: tuple | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int64)
        if v.ndim != 2:
            raise ValueError("values must be a (experiments, nodes) matrix")
        cards = tuple(int(r) for r in self.cardinalities)
        if v.shape[1] != len(cards):
            raise ValueError("one cardinality per column required")
        for j, r in enumerate(cards):
            if v.shape[0] and (v[:, j].min() < 0 or v[:, j].max() >= r):
                raise ValueError(f"column {j} has values outside [0, {r})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "cardinalities", cards)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(str(n) for n in self.names))

    @property
    def n_experiments(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]


def _write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def save_readings(path, dataset: Dataset, names) -> None:
    if len(names) != dataset.n_nodes:
        raise ValueError("one column name per node required")
    _write_table(path, names, ([repr(x) for x in row] for row in dataset.readings))


def load_readings(path):
    """Read a readings CSV; returns (Dataset, node names from the header)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    return Dataset(np.array(rows, dtype=float).reshape(len(rows), len(header))), tuple(header)


def save_discrete(path, data: DiscretizedDataset, names=None) -> None:
    names = names or data.names
    if names is None or len(names) != data.n_nodes:
        raise ValueError("one column name per node required")
    _write_table(path, names, data.values.tolist())


def load_discrete(path, cardinalities=None) -> DiscretizedDataset:
    """Read a discrete CSV. Cardinalities are taken from the caller when
    given, otherwise inferred as max value + 1 (floor 2) per column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[int(x) for x in row] for row in reader if row]
    values = np.array(rows, dtype=np.int64).reshape(len(rows), len(header))
    if cardinalities is None:
        cardinalities = tuple(
            max(2, int(values[:, j].max()) + 1) if len(rows) else 2
            for j in range(len(header))
        )
    return DiscretizedDataset(values, tuple(cardinalities), tuple(header))


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
