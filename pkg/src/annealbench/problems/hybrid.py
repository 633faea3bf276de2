"""Iterative path selection around the delay-scheduling QUBO."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from ..validation import ContractError
from .base import ProblemInstance
from .info import InfoInstance, Message, build_info_qubo, conflict_points, decode_info, encode_info, info_oracle


class SolverFailure(RuntimeError):
    """The QUBO solver returned an assignment that violates a constraint."""


@dataclass(frozen=True)
class HybridMessage:
    sender: int
    recipient: int
    cost: int
    scheduled: int = 0


@dataclass
class HybridState:
    paths: list[tuple[int, ...]]
    emissions: list[int]
    delays: list[int]
    arrivals: list[int]
    cost: int
    instance: InfoInstance


@dataclass
class HybridResult:
    paths: list[tuple[int, ...]]
    delays: list[int]
    emissions: list[int]
    cost: int
    initial_cost: int
    iterations: int
    history: list[dict] = field(default_factory=list)


def oracle_solver(pi: ProblemInstance) -> np.ndarray:
    """Reference delay solver: encodes the exact enumeration optimum."""
    res = info_oracle(pi.instance)
    if res is None:
        raise SolverFailure("no feasible schedule within the horizon")
    return np.asarray(encode_info(pi, res[1]), dtype=np.int8)


def _path_time(network: nx.Graph, path: Sequence[int]) -> int:
    return sum(int(network.edges[a, b].get("time", 1)) for a, b in zip(path, path[1:]))


def hybrid_path_delay(network: nx.Graph, messages: Sequence[HybridMessage],
                      qubo_solver: Callable[[ProblemInstance], Sequence[int]] = oracle_solver,
                      horizon: int | None = None, capacity_default: int = 1,
                      capacity_overrides=None, epsilon: float = 0.5, penalty: str = "safe",
                      max_candidates: int = 8, max_iterations: int | None = None) -> HybridResult:
    """Reroute the costliest delays until every delayed message has been tried.

    Edge attribute ``time`` gives the per-hop transmission time (default 1) and
    node attribute ``capacity`` the per-step capacity. Cost is measured against
    each message's shortest-path arrival, so a longer route pays for itself.
    """
    if not messages:
        raise ContractError("need at least one message")
    nodes = sorted(network.nodes)
    if nodes != list(range(len(nodes))):
        raise ContractError("network nodes must be labelled 0..n-1")
    node_capacity = {v: int(network.nodes[v]["capacity"])
                     for v in nodes if "capacity" in network.nodes[v]}

    candidates: list[list[tuple[int, ...]]] = []
    for m in messages:
        try:
            gen = nx.shortest_simple_paths(network, m.sender, m.recipient, weight="time")
            candidates.append([tuple(p) for p in itertools.islice(gen, max_candidates)])
        except nx.NetworkXNoPath as exc:
            raise ContractError(f"no path from {m.sender} to {m.recipient}") from exc
    shortest = [_path_time(network, c[0]) for c in candidates]
    if horizon is None:
        horizon = max(m.scheduled + d for m, d in zip(messages, shortest)) + len(messages)
    n_paths = sum(len(c) for c in candidates)
    limit = max_iterations if max_iterations is not None else 2 * len(messages) * n_paths

    def evaluate(paths) -> HybridState:
        msgs = [Message(p, tuple(int(network.edges[a, b].get("time", 1)) for a, b in zip(p, p[1:])),
                        m.cost, m.scheduled) for p, m in zip(paths, messages)]
        inst = InfoInstance(len(nodes), tuple(network.edges), tuple(msgs), horizon,
                            capacity_default, node_capacity, capacity_overrides or {},
                            epsilon, penalty)
        pi = build_info_qubo(inst)
        dec = decode_info(np.asarray(qubo_solver(pi)), pi)
        if not dec["feasible"]:
            raise SolverFailure(f"solver returned an infeasible schedule: {dec['violations']}")
        arrivals = [t + mm.duration for t, mm in zip(dec["emissions"], msgs)]
        delays = [a - m.scheduled - d for a, m, d in zip(arrivals, messages, shortest)]
        cost = sum(m.cost * d for m, d in zip(messages, delays))
        return HybridState(list(paths), dec["emissions"], delays, arrivals, cost, inst)

    state = evaluate([c[0] for c in candidates])
    initial_cost = state.cost
    best = state
    considered: set[int] = set()
    tried: dict[int, set] = {}
    target: int | None = None
    history: list[dict] = []
    it = 0

    def costliest(pool):
        pool = [i for i in pool if state.delays[i] > 0 and i not in considered]
        if not pool:
            return None
        return max(pool, key=lambda i: (messages[i].cost * state.delays[i], -i))

    while it < limit:
        if target is None or target in considered or state.delays[target] == 0:
            target = costliest(range(len(messages)))
            if target is None:
                break
        t = target
        blocked = conflict_points(state.instance, state.emissions, t)
        seen = tried.setdefault(t, {state.paths[t]})
        m = messages[t]
        new_path = None
        for p in candidates[t]:
            if p in seen:
                continue
            on_time = Message(p, tuple(int(network.edges[a, b].get("time", 1)) for a, b in zip(p, p[1:])),
                              m.cost, m.scheduled).arrivals(m.scheduled)
            if blocked.isdisjoint(on_time):
                new_path = p
                break
        if new_path is None:
            considered.add(t)
            target = None
            continue
        seen.add(new_path)
        it += 1
        trial = evaluate(state.paths[:t] + [new_path] + state.paths[t + 1:])
        step = {"message": t, "path": new_path, "cost": trial.cost, "previous": state.cost}
        if trial.cost < state.cost:
            step["action"] = "accept"
            state = trial
            target = None
        elif trial.arrivals[t] > state.arrivals[t]:
            step["action"] = "rollback"
            considered.add(t)
            target = None
        else:
            fresh = [j for j in range(len(messages))
                     if j != t and trial.delays[j] > 0 and state.delays[j] == 0]
            if fresh:
                step["action"] = "keep"
                state = trial
                considered.add(t)
                target = costliest(fresh)
            else:
                step["action"] = "rollback"
                considered.add(t)
                target = None
        history.append(step)
        if state.cost < best.cost:
            best = state

    return HybridResult(best.paths, best.delays, best.emissions, best.cost, initial_cost, it, history)
