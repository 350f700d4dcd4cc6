"""Discrete Bayesian network representation, validation and sampling.

A network is a DAG over discrete nodes. Each node carries a conditional
probability table (CPT) with one row per configuration of its parents.
Parent configurations are indexed mixed-radix with the FIRST listed parent
as the most significant digit, so tables serialize unambiguously.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CycleDetected, NotNormalized, ShapeMismatch, UnknownNode

ROW_SUM_TOL = 1e-9
LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class NetworkSpec:
    """Graph skeleton: named nodes with cardinalities plus directed arcs.

    ``nodes`` is an ordered sequence of (name, cardinality) pairs and
    ``arcs`` a sequence of (parent_name, child_name) pairs. Structural
    invariants (unique names, no self or duplicate arcs, acyclicity)
    are checked at construction.
    """

    nodes: tuple = ()
    arcs: tuple = ()

    def __post_init__(self):
        nodes = tuple((str(n), int(r)) for n, r in self.nodes)
        arcs = tuple((str(p), str(c)) for p, c in self.arcs)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "arcs", arcs)

        names = [n for n, _ in nodes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate node names")
        for _, r in nodes:
            if r < 2:
                raise ValueError("node cardinality must be at least 2")
        index = {n: i for i, n in enumerate(names)}
        seen = set()
        for p, c in arcs:
            if p not in index:
                raise UnknownNode(f"arc parent {p!r} is not a node")
            if c not in index:
                raise UnknownNode(f"arc child {c!r} is not a node")
            if p == c:
                raise ValueError(f"self-arc on {p!r}")
            if (p, c) in seen:
                raise ValueError(f"duplicate arc {p!r} -> {c!r}")
            seen.add((p, c))
        self.topo_order  # force the cycle check

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.nodes)

    @cached_property
    def cardinalities(self) -> tuple:
        return tuple(r for _, r in self.nodes)

    @cached_property
    def _index(self) -> dict:
        return {n: i for i, n in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownNode(f"no node named {name!r}") from None

    @cached_property
    def _parents(self) -> tuple:
        # parents kept in arc-listing order; this order defines the
        # mixed-radix row index of the child's CPT
        out = [[] for _ in range(self.n_nodes)]
        for p, c in self.arcs:
            out[self._index[c]].append(self._index[p])
        return tuple(tuple(v) for v in out)

    def parents(self, i: int) -> tuple:
        return self._parents[i]

    def n_parent_configs(self, i: int) -> int:
        q = 1
        for p in self._parents[i]:
            q *= self.cardinalities[p]
        return q

    def parent_config_index(self, i: int, values) -> int:
        """Mixed-radix row index for node ``i`` given a full assignment."""
        idx = 0
        for p in self._parents[i]:
            idx = idx * self.cardinalities[p] + int(values[p])
        return idx

    @cached_property
    def topo_order(self) -> tuple:
        """Topological order, smallest node index first among ready nodes."""
        indeg = [0] * self.n_nodes
        children = [[] for _ in range(self.n_nodes)]
        for p, c in self.arcs:
            pi, ci = self._index[p], self._index[c]
            indeg[ci] += 1
            children[pi].append(ci)
        ready = sorted(i for i in range(self.n_nodes) if indeg[i] == 0)
        order = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for c in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    # keep the ready list sorted for determinism
                    lo = 0
                    while lo < len(ready) and ready[lo] < c:
                        lo += 1
                    ready.insert(lo, c)
        if len(order) != self.n_nodes:
            raise CycleDetected("arc set contains a directed cycle")
        return tuple(order)

    def degrees_of_freedom(self) -> int:
        """Number of free CPT parameters: sum of rows x (cardinality - 1)."""
        return sum(
            self.n_parent_configs(i) * (r - 1)
            for i, r in enumerate(self.cardinalities)
        )


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table for one node.

    ``table`` has shape (parent configurations, cardinality); root nodes
    have a single row.
    """

    node: int
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim == 1:
            t = t[None, :]
        t.setflags(write=False)
        object.__setattr__(self, "table", t)


@dataclass(frozen=True)
class Network:
    """A validated spec plus one CPT table per node. Immutable."""

    spec: NetworkSpec
    cpts: tuple = field(repr=False)
    topo_order: tuple = ()

    def cpt(self, i: int) -> np.ndarray:
        return self.cpts[i]

    def degrees_of_freedom(self) -> int:
        return self.spec.degrees_of_freedom()

    def parameter_vector(self) -> np.ndarray:
        """All CPT entries flattened in node order (Kahn order of rows)."""
        return np.concatenate([t.ravel() for t in self.cpts])


def validate(spec: NetworkSpec, cpts) -> Network:
    """Check CPTs against ``spec`` and assemble an immutable Network.

    ``cpts`` may be a sequence of :class:`Cpt` (any order) or of plain
    arrays aligned with ``spec.nodes``. Raises ShapeMismatch when a
    table's layout disagrees with the spec and NotNormalized when a row
    does not sum to 1 within ``ROW_SUM_TOL`` or has entries outside [0, 1].
    """
    n = spec.n_nodes
    tables: list = [None] * n
    for pos, c in enumerate(cpts):
        if isinstance(c, Cpt):
            i, t = c.node, c.table
        else:
            i, t = pos, np.asarray(c, dtype=float)
        if not 0 <= i < n:
            raise ShapeMismatch(f"CPT for unknown node index {i}")
        if tables[i] is not None:
            raise ShapeMismatch(f"duplicate CPT for node {spec.names[i]}")
        tables[i] = t
    missing = [spec.names[i] for i in range(n) if tables[i] is None]
    if missing:
        raise ShapeMismatch(f"missing CPTs for {missing}")

    out = []
    for i in range(n):
        t = np.array(tables[i], dtype=float)
        if t.ndim == 1:
            t = t[None, :]
        rows, r = spec.n_parent_configs(i), spec.cardinalities[i]
        if t.shape != (rows, r):
            raise ShapeMismatch(
                f"CPT of {spec.names[i]} has shape {t.shape}, expected {(rows, r)}"
            )
        if np.any(t < 0.0) or np.any(t > 1.0 + 1e-12):
            raise NotNormalized(f"CPT of {spec.names[i]} has entries outside [0, 1]")
        err = np.abs(t.sum(axis=1) - 1.0)
        if np.any(err > ROW_SUM_TOL):
            raise NotNormalized(
                f"CPT row of {spec.names[i]} sums off by {err.max():.3g}"
            )
        t.setflags(write=False)
        out.append(t)
    return Network(spec=spec, cpts=tuple(out), topo_order=spec.topo_order)


def joint_log_prob(net: Network, assignment) -> float:
    """Log joint probability of a full assignment.

    The joint factorizes into per-node conditionals given parents. A
    factor that is exactly zero makes the result -inf; positive factors
    are clamped at a tiny floor before the log.
    """
    a = np.asarray(assignment, dtype=int)
    spec = net.spec
    if a.shape != (spec.n_nodes,):
        raise ValueError(f"assignment must have length {spec.n_nodes}")
    total = 0.0
    for i in range(spec.n_nodes):
        row = spec.parent_config_index(i, a)
        p = net.cpts[i][row, a[i]]
        if p <= 0.0:
            return -np.inf
        total += np.log(max(p, LOG_FLOOR))
    return float(total)


def ancestral_sample(net: Network, rng: np.random.Generator) -> np.ndarray:
    """Draw one joint assignment by sampling nodes in topological order."""
    return sample_assignments(net, 1, rng)[0]


def sample_assignments(net: Network, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` joint assignments, vectorized across samples.

    Returns an (n, n_nodes) integer array. Each node is sampled from the
    CPT row selected by its already-sampled parents.
    """
    spec = net.spec
    values = np.zeros((n, spec.n_nodes), dtype=np.int64)
    for i in net.topo_order:
        pars = spec.parents(i)
        rows = np.zeros(n, dtype=np.int64)
        for p in pars:
            rows = rows * spec.cardinalities[p] + values[:, p]
        probs = net.cpts[i][rows]              # (n, r_i)
        u = rng.random(n)
        drawn = (probs.cumsum(axis=1) < u[:, None]).sum(axis=1)
        # cumsum can fall a hair short of 1; clamp to the last value
        values[:, i] = np.minimum(drawn, spec.cardinalities[i] - 1)
    return values
