"""Single-document model serialization.

A model document is JSON with stable key order: the node list with
cardinalities, the arc list, and optionally the CPT rows and the sensor
section (means and sigmas per node). Floats round-trip exactly because
json writes shortest-repr decimals.
"""

import json
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ShapeMismatch
from .network import Network, NetworkSpec, validate
from .sensors import SensorModel

FORMAT_NAME = "affbn-network"
FORMAT_VERSION = 1


class ModelDocument(NamedTuple):
    spec: NetworkSpec
    cpts: list | None
    sensors: SensorModel | None

    def network(self) -> Network:
        if self.cpts is None:
            raise ShapeMismatch("model document carries no CPTs")
        return validate(self.spec, self.cpts)


def model_to_dict(spec: NetworkSpec, cpts=None, sensors: SensorModel | None = None) -> dict:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "nodes": [{"name": n, "cardinality": r} for n, r in spec.nodes],
        "arcs": [[p, c] for p, c in spec.arcs],
    }
    if cpts is not None:
        tables = list(cpts.cpts) if isinstance(cpts, Network) else list(cpts)
        doc["cpts"] = {
            spec.names[i]: np.asarray(t, dtype=float).tolist()
            for i, t in enumerate(tables)
        }
    if sensors is not None:
        doc["sensors"] = {
            spec.names[i]: {
                "means": sensors.means[i].tolist(),
                "sigmas": sensors.sigmas[i].tolist(),
            }
            for i in range(sensors.n_nodes)
        }
    return doc


def model_from_dict(doc: dict) -> ModelDocument:
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document")
    nodes = tuple((d["name"], int(d["cardinality"])) for d in doc["nodes"])
    arcs = tuple((p, c) for p, c in doc.get("arcs", []))
    spec = NetworkSpec(nodes=nodes, arcs=arcs)

    cpts = None
    if "cpts" in doc:
        by_name = doc["cpts"]
        missing = [n for n in spec.names if n not in by_name]
        if missing:
            raise ShapeMismatch(f"cpts section is missing nodes {missing}")
        cpts = [np.array(by_name[n], dtype=float) for n in spec.names]

    sensors = None
    if "sensors" in doc:
        sec = doc["sensors"]
        missing = [n for n in spec.names if n not in sec]
        if missing:
            raise ShapeMismatch(f"sensors section is missing nodes {missing}")
        sensors = SensorModel(
            means=tuple(np.array(sec[n]["means"], dtype=float) for n in spec.names),
            sigmas=tuple(np.array(sec[n]["sigmas"], dtype=float) for n in spec.names),
        )
    return ModelDocument(spec=spec, cpts=cpts, sensors=sensors)


def save_model(path, spec: NetworkSpec, cpts=None, sensors: SensorModel | None = None) -> None:
    doc = model_to_dict(spec, cpts=cpts, sensors=sensors)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path) -> ModelDocument:
    return model_from_dict(json.loads(Path(path).read_text()))
