"""Exact inference on small discrete networks.

Two interchangeable paths are provided: full-joint enumeration (the
reference, viable up to ~2^20 joint configurations) and per-query
variable elimination (the fast path). Both accept soft evidence: one
nonnegative likelihood vector per node, unnormalized allowed.

All internal factor arrays carry a leading batch axis so a whole dataset
of independent experiments can be processed in one pass; reductions run
in a fixed order, which keeps results bit-reproducible.
"""

import numpy as np

from .errors import AllZeroLikelihood, EvidenceShapeMismatch
from .network import Network

ENUM_LIMIT = 1 << 20


def _as_evidence_batch(net: Network, evidence):
    """Coerce per-node evidence into a list of (B, r_i) float arrays."""
    spec = net.spec
    if len(evidence) != spec.n_nodes:
        raise EvidenceShapeMismatch(
            f"got {len(evidence)} evidence vectors for {spec.n_nodes} nodes"
        )
    cols = []
    batch = None
    for i, vec in enumerate(evidence):
        a = np.asarray(vec, dtype=float)
        if a.ndim == 1:
            a = a[None, :]
        if a.ndim != 2 or a.shape[1] != spec.cardinalities[i]:
            raise EvidenceShapeMismatch(
                f"evidence for node {spec.names[i]} has shape {a.shape}, "
                f"expected (*, {spec.cardinalities[i]})"
            )
        if batch is None:
            batch = a.shape[0]
        elif a.shape[0] != batch:
            raise EvidenceShapeMismatch("evidence vectors disagree on batch size")
        if np.any(a < 0.0):
            raise ValueError("evidence likelihoods must be nonnegative")
        cols.append(a)
    return cols


def _cpt_factor(net: Network, i: int):
    """CPT of node i as (sorted vars, array with unit batch axis)."""
    spec = net.spec
    pars = spec.parents(i)
    order = (*pars, i)
    dims = tuple(spec.cardinalities[v] for v in order)
    arr = net.cpts[i].reshape(dims)
    perm = tuple(np.argsort(order))
    arr = np.transpose(arr, perm)
    return tuple(sorted(order)), arr[None, ...]


def _expand(fvars, arr, allvars):
    """Reshape so ``arr`` broadcasts over every axis of ``allvars``."""
    shape = [arr.shape[0]]
    k = 1
    for v in allvars:
        if v in fvars:
            shape.append(arr.shape[k])
            k += 1
        else:
            shape.append(1)
    return arr.reshape(shape)


def _multiply(f1, f2):
    v1, a1 = f1
    v2, a2 = f2
    if v1 == v2:
        return v1, a1 * a2
    union = tuple(sorted(set(v1) | set(v2)))
    return union, _expand(v1, a1, union) * _expand(v2, a2, union)


def _eliminate(factors, keep, n_nodes, cards):
    """Sum out every variable not in ``keep``; greedy min-size ordering.

    Returns (sorted keep vars, batched array over their cardinalities),
    unnormalized.
    """
    keep_set = set(keep)
    todo = [v for v in range(n_nodes) if v not in keep_set]
    factors = list(factors)
    while todo:
        best_v, best_cost = None, None
        for v in todo:
            scope = set()
            for fvars, _ in factors:
                if v in fvars:
                    scope.update(fvars)
            cost = 1
            for u in scope:
                if u != v:
                    cost *= cards[u]
            if best_cost is None or cost < best_cost:
                best_v, best_cost = v, cost
        touched = [f for f in factors if best_v in f[0]]
        rest = [f for f in factors if best_v not in f[0]]
        prod = touched[0]
        for f in touched[1:]:
            prod = _multiply(prod, f)
        fvars, arr = prod
        axis = fvars.index(best_v) + 1  # axis 0 is the batch
        arr = arr.sum(axis=axis)
        rest.append((tuple(u for u in fvars if u != best_v), arr))
        factors = rest
        todo.remove(best_v)

    prod = factors[0]
    for f in factors[1:]:
        prod = _multiply(prod, f)
    return prod


def _network_factors(net: Network, ev_cols=None):
    factors = [_cpt_factor(net, i) for i in range(net.spec.n_nodes)]
    if ev_cols is not None:
        factors.extend(((i,), col) for i, col in enumerate(ev_cols))
    return factors


def _check_partition(z: np.ndarray):
    if np.any(z == 0.0):
        bad = np.flatnonzero(z == 0.0)
        raise AllZeroLikelihood(
            f"evidence annihilates every configuration (experiments {bad[:5].tolist()})"
        )


def _joint_weights(net: Network, ev_cols=None):
    """Full-joint tensor of p(z) x evidence, batched. Reference path only."""
    spec = net.spec
    cards = spec.cardinalities
    size = int(np.prod(cards))
    if size > ENUM_LIMIT:
        raise ValueError(f"joint has {size} configurations, enumeration refused")
    allvars = tuple(range(spec.n_nodes))
    w = np.ones((1,) + cards)
    for i in range(spec.n_nodes):
        fvars, arr = _cpt_factor(net, i)
        w = w * _expand(fvars, arr, allvars)
    if ev_cols is not None:
        for i, col in enumerate(ev_cols):
            w = w * _expand((i,), col, allvars)
    return w


def _family_axes(net: Network, i: int):
    """Sorted family vars plus the transpose taking them to (parents..., i)."""
    pars = net.spec.parents(i)
    fam_sorted = tuple(sorted((*pars, i)))
    perm = [fam_sorted.index(v) for v in (*pars, i)]
    return fam_sorted, perm


def _family_tables_batch(net: Network, ev_cols, method: str = "eliminate"):
    """Posterior family tables for every node, plus the partition function.

    Returns (tables, z) where tables[i] has shape (B, parent_configs, r_i)
    and sums to 1 over its last two axes, and z is the (B,) partition
    function of the (possibly rescaled) evidence.
    """
    spec = net.spec
    cards = spec.cardinalities
    tables = []
    z_ref = None
    if method == "enumerate":
        w = _joint_weights(net, ev_cols)
        z_ref = w.reshape(w.shape[0], -1).sum(axis=1)
        _check_partition(z_ref)
    elif method != "eliminate":
        raise ValueError(f"unknown method {method!r}")

    factors = _network_factors(net, ev_cols) if method == "eliminate" else None
    for i in range(spec.n_nodes):
        fam_sorted, perm = _family_axes(net, i)
        if method == "eliminate":
            fvars, arr = _eliminate(factors, fam_sorted, spec.n_nodes, cards)
            arr = _expand(fvars, arr, fam_sorted)
            arr = np.broadcast_to(
                arr, (arr.shape[0],) + tuple(cards[v] for v in fam_sorted)
            )
            z = arr.reshape(arr.shape[0], -1).sum(axis=1)
            if z_ref is None:
                z_ref = z
                _check_partition(z_ref)
        else:
            other = tuple(
                1 + v for v in range(spec.n_nodes) if v not in set(fam_sorted)
            )
            arr = w.sum(axis=other) if other else w
            z = z_ref
        arr = np.transpose(arr, [0] + [1 + p for p in perm])
        r = cards[i]
        table = arr.reshape(arr.shape[0], -1, r) / z[:, None, None]
        tables.append(table)
    return tables, z_ref


def family_marginals(net: Network, soft_evidence, method: str = "eliminate"):
    """Posterior over each node jointly with its parents, given evidence.

    ``soft_evidence`` holds one likelihood vector per node (the chance of
    that node's observed reading under each discrete value; unnormalized
    is fine). Returns a list with one (parent_configs, r_i) table per
    node, each summing to 1. ``method`` may be "eliminate" (default) or
    "enumerate" (full-joint reference).
    """
    cols = _as_evidence_batch(net, soft_evidence)
    if any(c.shape[0] != 1 for c in cols):
        raise EvidenceShapeMismatch("family_marginals expects a single experiment")
    tables, _ = _family_tables_batch(net, cols, method=method)
    return [t[0] for t in tables]


def marginal(net: Network, targets, soft_evidence=None, method: str = "eliminate"):
    """Exact posterior over a set of target nodes.

    ``targets`` is a sequence of node indices; the result axes follow the
    order given there. With no evidence this is the prior marginal.
    """
    spec = net.spec
    cards = spec.cardinalities
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError("duplicate target nodes")
    for t in targets:
        if not 0 <= t < spec.n_nodes:
            raise ValueError(f"target index {t} out of range")
    cols = None if soft_evidence is None else _as_evidence_batch(net, soft_evidence)
    keep = tuple(sorted(targets))
    if method == "eliminate":
        fvars, arr = _eliminate(
            _network_factors(net, cols), keep, spec.n_nodes, cards
        )
        arr = _expand(fvars, arr, keep)
        arr = np.broadcast_to(arr, (arr.shape[0],) + tuple(cards[v] for v in keep))
    elif method == "enumerate":
        w = _joint_weights(net, cols)
        other = tuple(1 + v for v in range(spec.n_nodes) if v not in set(keep))
        arr = w.sum(axis=other) if other else w
    else:
        raise ValueError(f"unknown method {method!r}")
    z = arr.reshape(arr.shape[0], -1).sum(axis=1)
    _check_partition(z)
    arr = arr / z.reshape((-1,) + (1,) * len(keep))
    perm = [keep.index(t) for t in targets]
    out = np.transpose(arr, [0] + [1 + p for p in perm])
    return out[0] if out.shape[0] == 1 else out


def node_marginals(net: Network):
    """Prior marginal distribution of every node, by elimination."""
    return [marginal(net, (i,)) for i in range(net.spec.n_nodes)]


def partition_function(net: Network, ev_cols, method: str = "eliminate"):
    """Batched sum over all joint configurations of prior x evidence."""
    spec = net.spec
    if method == "eliminate":
        fvars, arr = _eliminate(
            _network_factors(net, ev_cols), (), spec.n_nodes, spec.cardinalities
        )
        return arr
    if method == "enumerate":
        w = _joint_weights(net, ev_cols)
        return w.reshape(w.shape[0], -1).sum(axis=1)
    raise ValueError(f"unknown method {method!r}")


def query(net: Network, sensors, readings: dict, targets, method: str = "eliminate"):
    """Posterior over target nodes given raw sensor readings.

    ``readings`` maps node name (or index) to a real-valued observation;
    nodes without readings contribute no evidence. ``targets`` is a
    sequence of node names or indices. Returns an array whose axes match
    the target order, normalized. Readings on target nodes are allowed
    and simply act as additional evidence.
    """
    spec = net.spec

    def _idx(x):
        return spec.index(x) if isinstance(x, str) else int(x)

    ev = [np.ones(r) for r in spec.cardinalities]
    for key, x in readings.items():
        i = _idx(key)
        ev[i] = sensors.emission_likelihoods(i, float(x))
    target_idx = [_idx(t) for t in targets]
    return marginal(net, target_idx, soft_evidence=ev, method=method)
