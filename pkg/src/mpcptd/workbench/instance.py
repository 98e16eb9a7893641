"""JSON instance files.

Layout (``schema_version`` 1)::

    {
      "schema_version": 1,
      "name": "paris-like-01",
      "seed": 7,
      "horizon": {"start": 0, "end": 1440, "grid": [11.9, 23.8, ...]},
      "facilities": ["0", "1", ...],
      "customers": ["0", "1", ...],          # optional, defaults to facilities
      "arcs": [
        {"from": "0", "to": "1", "breakpoints": [[0, 12.5], [11.9, 13.0], ...]},
        ...
      ]
    }

Every breakpoint time must be a grid instant (or the horizon start/end) and
every facility/customer pair needs exactly one arc.
"""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from ..errors import CompletenessError, InstanceFormatError, MPCPError, SchemaError, ValidationError
from ..tdnet import PiecewiseLinearTT, TDNetwork, TimeHorizon

SCHEMA_VERSION = 1

_node_id = {"type": ["string", "integer"]}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "horizon", "facilities", "arcs"],
    "properties": {
        "schema_version": {"type": "integer"},
        "name": {"type": "string"},
        "seed": {"type": ["integer", "null"]},
        "horizon": {
            "type": "object",
            "required": ["start", "end", "grid"],
            "properties": {
                "start": {"type": "number"},
                "end": {"type": "number"},
                "grid": {"type": "array", "items": {"type": "number"}},
            },
        },
        "facilities": {"type": "array", "items": _node_id, "minItems": 1},
        "customers": {"type": "array", "items": _node_id, "minItems": 1},
        "arcs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to", "breakpoints"],
                "properties": {
                    "from": _node_id,
                    "to": _node_id,
                    "breakpoints": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 2,
                            "maxItems": 2,
                        },
                    },
                },
            },
        },
    },
}


def instance_from_dict(doc: dict) -> TDNetwork:
    try:
        jsonschema.validate(doc, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc['schema_version']} (expected {SCHEMA_VERSION})")
    h = doc["horizon"]
    try:
        horizon = TimeHorizon(h["start"], h["end"], tuple(h["grid"]))
    except MPCPError as exc:
        raise ValidationError(f"horizon: {exc}") from None
    facilities = doc["facilities"]
    customers = doc.get("customers", facilities)
    arcs: dict[tuple, PiecewiseLinearTT] = {}
    for k, arc in enumerate(doc["arcs"]):
        key = (arc["from"], arc["to"])
        if key in arcs:
            raise CompletenessError(f"arcs/{k}: duplicate arc {key}")
        try:
            arcs[key] = PiecewiseLinearTT.from_pairs(arc["breakpoints"])
        except MPCPError as exc:
            raise ValidationError(f"arcs/{k} {key}: {exc}") from None
    return TDNetwork.from_arcs(
        facilities, customers, arcs, horizon, name=doc.get("name", ""), seed=doc.get("seed")
    )


def read_instance(path) -> TDNetwork:
    """Load and validate an instance file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return instance_from_dict(doc)


def _compact(times: np.ndarray, values: np.ndarray) -> list[list[float]]:
    # drop interior points flanked by equal values; interpolation is unchanged
    keep = [0]
    for k in range(1, len(values) - 1):
        if not (values[k - 1] == values[k] == values[k + 1]):
            keep.append(k)
    keep.append(len(values) - 1)
    return [[float(times[k]), float(values[k])] for k in keep]


def instance_to_dict(net: TDNetwork) -> dict:
    times = net.horizon.instants
    arcs = []
    for a, f in enumerate(net.facilities):
        for b, c in enumerate(net.customers):
            arcs.append({"from": f, "to": c, "breakpoints": _compact(times, net.tt[a, b])})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": net.name,
        "seed": net.seed,
        "horizon": {"start": net.horizon.start, "end": net.horizon.end, "grid": list(net.horizon.grid)},
        "facilities": list(net.facilities),
    }
    if net.customers != net.facilities:
        doc["customers"] = list(net.customers)
    doc["arcs"] = arcs
    return doc


def write_instance(path, net: TDNetwork) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(net), separators=(",", ":")), encoding="utf-8")
