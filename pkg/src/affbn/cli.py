"""Command-line entry points.

Subcommands:
  gen        emit a ground-truth model plus a synthesized dataset
  learn      fit one dataset with one algorithm, write the learned model
  query      posterior over target nodes given sensor readings
  structure  K2 search over MAP-discretized readings
  bench      the full EM-vs-discrete comparison suite
"""

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import count_mle, discretize, uniform_priors
from .bench import (
    ExperimentConfig,
    make_complex_network,
    make_simple_network,
    run_suite,
    summarize,
    synthesize_dataset,
)
from .data import ensure_dir, load_readings, save_discrete, save_readings
from .em import EmConfig, run_em
from .inference import node_marginals, query
from .serialize import load_model, save_model
from .structure import k2_search


def _add_em_flags(p):
    p.add_argument("--max-iters", type=int, default=100,
                   help="EM iteration cap (default 100)")
    p.add_argument("--tol", type=float, default=1e-3,
                   help="EM stops when the RMS parameter change drops below this")


def _em_config(args) -> EmConfig:
    return EmConfig(tol=args.tol, max_iters=args.max_iters)


def _make_template(args, rng):
    if args.net == "simple":
        return make_simple_network(rng, sigma=args.sigma)
    if args.net == "complex":
        return make_complex_network(rng, sigma=args.sigma)
    doc = load_model(args.net)
    if doc.cpts is None or doc.sensors is None:
        raise SystemExit(f"{args.net} must carry cpts and sensors for this command")
    return doc.network(), doc.sensors


def _cmd_gen(args):
    rng = np.random.default_rng(args.seed)
    net, sensors = _make_template(args, rng)
    data, truth = synthesize_dataset(net, sensors, args.size, rng)
    out = ensure_dir(args.out)
    save_model(out / "model.json", net.spec, cpts=net, sensors=sensors)
    save_readings(out / "readings.csv", data, net.spec.names)
    save_discrete(out / "truth.csv", truth)
    print(f"wrote model.json, readings.csv ({args.size} rows), truth.csv to {out}")


def _load_spec_sensors(path):
    doc = load_model(path)
    if doc.sensors is None:
        raise SystemExit(f"{path} has no sensors section")
    return doc


def _map_priors(doc, choice):
    if choice == "uniform":
        return uniform_priors(doc.spec.cardinalities)
    if doc.cpts is None:
        raise SystemExit(
            "model document has no CPTs; marginal MAP priors need them "
            "(pass --map-prior uniform instead)"
        )
    return node_marginals(doc.network())


def _cmd_learn(args):
    doc = _load_spec_sensors(args.net)
    data, names = load_readings(args.data)
    if names != doc.spec.names:
        raise SystemExit("dataset columns do not match the model's nodes")
    if args.algo == "em":
        rng = np.random.default_rng(args.seed)
        net, trace = run_em(doc.spec, doc.sensors, data, _em_config(args), rng)
        print(
            f"em: {trace.iterations} iterations ({trace.status}), "
            f"final log-likelihood {trace.final_loglik:.4f}"
        )
    else:
        priors = _map_priors(doc, args.map_prior)
        net = count_mle(discretize(doc.sensors, priors, data), doc.spec)
        print("discrete: counted MAP-assigned values")
    save_model(args.out, net.spec, cpts=net, sensors=doc.sensors)
    print(f"wrote learned model to {args.out}")


def _cmd_query(args):
    doc = _load_spec_sensors(args.net)
    if doc.cpts is None:
        raise SystemExit(f"{args.net} has no CPTs to query")
    net = doc.network()
    readings = {}
    for item in args.read or []:
        name, _, value = item.partition("=")
        readings[name] = float(value)
    targets = args.target
    post = query(net, doc.sensors, readings, targets)
    cards = [net.spec.cardinalities[net.spec.index(t)] for t in targets]
    print("P(" + ", ".join(targets) + " | readings)")
    for combo in itertools.product(*(range(r) for r in cards)):
        label = ", ".join(f"{t}={v}" for t, v in zip(targets, combo))
        print(f"  {label}: {post[combo]:.6f}")
    if args.json:
        Path(args.json).write_text(
            json.dumps({"targets": list(targets), "posterior": post.tolist()}, indent=2)
            + "\n"
        )


def _cmd_structure(args):
    doc = _load_spec_sensors(args.net)
    data, names = load_readings(args.data)
    if names != doc.spec.names:
        raise SystemExit("dataset columns do not match the model's nodes")
    priors = _map_priors(doc, args.map_prior)
    hard = discretize(doc.sensors, priors, data)
    if args.order:
        order = [doc.spec.index(n) for n in args.order.split(",")]
    else:
        order = list(range(doc.spec.n_nodes))
    learned = k2_search(hard, order, args.max_parents, names=doc.spec.names)
    if args.out:
        save_model(args.out, learned)
        print(f"wrote learned structure to {args.out}")
    arcs = ", ".join(f"{p}->{c}" for p, c in learned.arcs) or "(no arcs)"
    print(f"recovered arcs: {arcs}")


def _cmd_bench(args):
    algos = ("em", "discrete") if args.algo == "both" else (args.algo,)
    config = ExperimentConfig(
        network=args.net,
        sigma=args.sigma,
        sizes=tuple(int(s) for s in args.sizes.split(",")),
        repetitions=args.reps,
        seed=args.seed,
        em=_em_config(args),
        out_dir=args.out,
        map_prior=args.map_prior,
        jobs=args.jobs,
        algorithms=algos,
    )
    results = run_suite(config)
    table, reductions = summarize(results)
    print(f"{'size':>8} {'algorithm':>10} {'median':>10} {'q1':>10} {'q3':>10}")
    for c in table:
        print(
            f"{c.size:>8} {c.algorithm:>10} {c.median:>10.5f} {c.q1:>10.5f} {c.q3:>10.5f}"
        )
    for size, pct in sorted(reductions.items()):
        print(f"size {size}: em cuts the median rms error by {pct:.1f}%")
    if args.out:
        print(f"results written to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="affbn",
        description="Affordance Bayesian networks from noisy sensors: "
        "generate, learn, query and benchmark.",
    )
    p.add_argument("--version", action="version", version=f"affbn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="synthesize a ground-truth model and dataset")
    g.add_argument("--net", default="simple",
                   help="simple | complex | path to a model document")
    g.add_argument("--sigma", type=float, default=1.0, help="sensor noise std dev")
    g.add_argument("--size", type=int, default=300, help="number of experiments")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=_cmd_gen)

    l = sub.add_parser("learn", help="fit one dataset with one algorithm")
    l.add_argument("--net", required=True, help="model document with spec and sensors")
    l.add_argument("--data", required=True, help="readings CSV")
    l.add_argument("--algo", choices=("em", "discrete"), default="em")
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--map-prior", choices=("marginal", "uniform"), default="marginal")
    l.add_argument("--out", required=True, help="output model document")
    _add_em_flags(l)
    l.set_defaults(func=_cmd_learn)

    q = sub.add_parser("query", help="infer actions, features or effects")
    q.add_argument("--net", required=True, help="model document with cpts and sensors")
    q.add_argument("--read", action="append", metavar="NODE=VALUE",
                   help="sensor reading, repeatable")
    q.add_argument("--target", action="append", required=True, metavar="NODE",
                   help="node to infer, repeatable")
    q.add_argument("--json", help="also write the posterior to this JSON file")
    q.set_defaults(func=_cmd_query)

    s = sub.add_parser("structure", help="K2 structure search over a dataset")
    s.add_argument("--net", required=True, help="model document with sensors")
    s.add_argument("--data", required=True, help="readings CSV")
    s.add_argument("--order", help="comma-separated node names (default: model order)")
    s.add_argument("--max-parents", type=int, default=3)
    s.add_argument("--map-prior", choices=("marginal", "uniform"), default="marginal")
    s.add_argument("--out", help="output spec document")
    s.set_defaults(func=_cmd_structure)

    b = sub.add_parser("bench", help="full EM-vs-discrete benchmark")
    b.add_argument("--net", default="simple",
                   help="simple | complex | path to a model document")
    b.add_argument("--sigma", type=float, default=1.0)
    b.add_argument("--sizes", default="300,3000", help="comma-separated database sizes")
    b.add_argument("--reps", type=int, default=30)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--algo", choices=("em", "discrete", "both"), default="both")
    b.add_argument("--out", help="output directory (enables resume)")
    b.add_argument("--map-prior", choices=("marginal", "uniform"), default="marginal")
    b.add_argument("--jobs", type=int, default=None, help="worker processes")
    _add_em_flags(b)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
