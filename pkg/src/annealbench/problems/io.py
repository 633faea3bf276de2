"""JSON schemas for problem instances and built problems.

Instance records carry a ``class`` tag:

* ``bdmst``: ``n_nodes``, ``edges`` as ``[u, v, w]``, ``max_degree``, ``root``, ``epsilon``
* ``gc``: ``n_nodes``, ``edges`` as ``[u, v]``, ``colors``
* ``info``: ``n_nodes``, ``edges``, ``messages`` (each ``path``, ``times``, ``cost``,
  ``scheduled``), ``horizon``, ``capacity_default``, ``node_capacity`` as ``[v, B]``,
  ``capacity_overrides`` as ``[v, t, B]``, ``epsilon``, ``penalty``

All records also carry ``name``. A built problem adds the QUBO, variable labels,
penalty weights and the cached oracle optimum on top of the instance record.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..validation import ContractError
from .base import ProblemInstance
from .bdmst import BdMstInstance, build_bdmst_qubo
from .gc import GcInstance, build_gc_qubo
from .info import InfoInstance, Message, build_info_qubo


def instance_to_dict(inst) -> dict:
    if isinstance(inst, BdMstInstance):
        return {"class": "bdmst", "name": inst.name, "n_nodes": inst.n_nodes,
                "edges": [list(e) for e in inst.edges], "max_degree": inst.max_degree,
                "root": inst.root, "epsilon": inst.epsilon}
    if isinstance(inst, GcInstance):
        return {"class": "gc", "name": inst.name, "n_nodes": inst.n_nodes,
                "edges": [list(e) for e in inst.edges], "colors": inst.colors}
    if isinstance(inst, InfoInstance):
        return {
            "class": "info", "name": inst.name, "n_nodes": inst.n_nodes,
            "edges": [list(e) for e in inst.edges],
            "messages": [{"path": list(m.path), "times": list(m.times), "cost": m.cost,
                          "scheduled": m.scheduled} for m in inst.messages],
            "horizon": inst.horizon, "capacity_default": inst.capacity_default,
            "node_capacity": [[v, b] for v, b in sorted(inst.node_capacity.items())],
            "capacity_overrides": [[v, t, b] for (v, t), b in sorted(inst.capacity_overrides.items())],
            "epsilon": inst.epsilon, "penalty": inst.penalty,
        }
    raise ContractError(f"unsupported instance type {type(inst).__name__}")


def instance_from_dict(data: dict):
    kind = data.get("class")
    name = data.get("name", kind)
    if kind == "bdmst":
        return BdMstInstance(data["n_nodes"], tuple(tuple(e) for e in data["edges"]),
                             data["max_degree"], data.get("root"), data.get("epsilon", 0.5), name)
    if kind == "gc":
        return GcInstance(data["n_nodes"], tuple(tuple(e) for e in data["edges"]),
                          data["colors"], name)
    if kind == "info":
        msgs = tuple(Message(tuple(m["path"]), tuple(m["times"]), m["cost"], m.get("scheduled", 0))
                     for m in data["messages"])
        return InfoInstance(
            data["n_nodes"], tuple(tuple(e) for e in data["edges"]), msgs, data["horizon"],
            data.get("capacity_default", 1),
            {v: b for v, b in data.get("node_capacity", [])},
            {(v, t): b for v, t, b in data.get("capacity_overrides", [])},
            data.get("epsilon", 0.5), data.get("penalty", "safe"), name)
    raise ContractError(f"unknown instance class {kind!r}")


def build_problem(inst, **options) -> ProblemInstance:
    """Dispatch to the builder for the instance's class."""
    if isinstance(inst, BdMstInstance):
        return build_bdmst_qubo(inst, **options)
    if isinstance(inst, GcInstance):
        return build_gc_qubo(inst)
    if isinstance(inst, InfoInstance):
        return build_info_qubo(inst, **options)
    raise ContractError(f"unsupported instance type {type(inst).__name__}")


def attach_oracle(pi: ProblemInstance) -> ProblemInstance:
    from . import bdmst, gc, info

    module = {"bdmst": bdmst, "gc": gc, "info": info}[pi.problem_class]
    return module.with_oracle(pi)


def problem_from_dict(data: dict) -> ProblemInstance:
    inst = instance_from_dict(data["instance"])
    options = {}
    if data["class"] == "bdmst":
        options["preprocess"] = data.get("metadata", {}).get("preprocess", True)
    if data["class"] == "info":
        options["weights"] = data.get("penalty_weights")
    pi = build_problem(inst, **options)
    if data.get("labels") is not None and [list(x) for x in pi.registry] != data["labels"]:
        raise ContractError("stored variable labels do not match the rebuilt problem")
    return pi.with_optimum(data.get("optimum"))


def save_problem(pi: ProblemInstance, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(pi.to_dict(), indent=1, sort_keys=True))
    return path


def load_problem(path) -> ProblemInstance:
    data = json.loads(Path(path).read_text())
    if "instance" not in data:
        return build_problem(instance_from_dict(data))
    return problem_from_dict(data)
