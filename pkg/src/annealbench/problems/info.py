"""Information sharing: delay scheduling of messages over fixed network paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx

from ..validation import ContractError
from .base import ProblemInstance, QuboBuilder

INFO_GROUPS = ("capacity", "connectivity", "arrival")
ORACLE_MAX_SCHEDULES = 10**7
PENALTY_MODES = ("safe", "local", "empirical")


@dataclass(frozen=True)
class Message:
    path: tuple[int, ...]
    times: tuple[int, ...]
    cost: int
    scheduled: int = 0

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(v) for v in self.path))
        object.__setattr__(self, "times", tuple(int(t) for t in self.times))
        if len(self.path) < 1:
            raise ContractError("a message path needs at least one node")
        if len(set(self.path)) != len(self.path):
            raise ContractError("message paths must be simple")
        if len(self.times) != len(self.path) - 1:
            raise ContractError("need one transmission time per path edge")
        if any(t < 1 for t in self.times):
            raise ContractError("transmission times must be positive integers")
        if self.cost < 1:
            raise ContractError("delay cost must be a positive integer")
        if self.scheduled < 0:
            raise ContractError("scheduled emission time must be non-negative")

    @property
    def duration(self) -> int:
        return sum(self.times)

    @property
    def recipient(self) -> int:
        return self.path[-1]

    def earliest(self) -> list[int]:
        """Earliest arrival time at each path node."""
        out = [self.scheduled]
        for t in self.times:
            out.append(out[-1] + t)
        return out

    def arrivals(self, emission: int) -> list[tuple[int, int]]:
        """``(node, time)`` pairs visited when emitted at ``emission`` without waiting."""
        shift = emission - self.scheduled
        return [(v, t + shift) for v, t in zip(self.path, self.earliest())]


@dataclass(frozen=True)
class InfoInstance:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    messages: tuple[Message, ...]
    horizon: int
    capacity_default: int = 1
    node_capacity: Mapping[int, int] = field(default_factory=dict)
    capacity_overrides: Mapping[tuple[int, int], int] = field(default_factory=dict)
    epsilon: float = 0.5
    penalty: str = "safe"
    name: str = "info"

    def __post_init__(self):
        edges = tuple(sorted({(min(u, v), max(u, v)) for u, v in self.edges}))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "node_capacity",
                           {int(v): int(b) for v, b in dict(self.node_capacity).items()})
        object.__setattr__(self, "capacity_overrides",
                           {(int(v), int(t)): int(b)
                            for (v, t), b in dict(self.capacity_overrides).items()})
        g = self.graph()
        for i, msg in enumerate(self.messages):
            for a, b in zip(msg.path, msg.path[1:]):
                if not g.has_edge(a, b):
                    raise ContractError(f"message {i}: ({a}, {b}) is not a network edge")
            if msg.scheduled + msg.duration > self.horizon:
                raise ContractError(
                    f"message {i} cannot arrive by the horizon t_h={self.horizon}")
        caps = [self.capacity_default, *self.node_capacity.values(),
                *self.capacity_overrides.values()]
        if any(b < 0 for b in caps):
            raise ContractError("capacities must be non-negative")
        if self.penalty not in PENALTY_MODES:
            raise ContractError(f"penalty mode must be one of {PENALTY_MODES}")
        if self.epsilon <= 0:
            raise ContractError("epsilon must be positive")

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(self.edges)
        return g

    def capacity(self, v: int, t: int) -> int:
        if (v, t) in self.capacity_overrides:
            return self.capacity_overrides[(v, t)]
        return self.node_capacity.get(v, self.capacity_default)

    def emission_window(self, i: int) -> range:
        msg = self.messages[i]
        return range(msg.scheduled, self.horizon - msg.duration + 1)


def penalty_weights(inst: InfoInstance, mode: str | None = None) -> dict[str, float]:
    """Weights for the capacity, connectivity and arrival penalties.

    ``safe``: ``sum_i c_i t_h + eps`` on every group. Penalties are integer valued,
    and the objective spans less than ``sum_i c_i t_h`` over all assignments, so
    any violation costs more than it can save even through other messages.
    ``local``: per-constraint bounds ``max_i c_i (t_h - D_i)``, ``max_{i,j} c_i l_ij``
    and ``max_i c_i t_h``, which ignore knock-on savings. ``empirical``:
    ``1/2 sum_i c_i sum_{t = t_min,i}^{t_h} t`` on every group.
    """
    mode = mode or inst.penalty
    eps, th = inst.epsilon, inst.horizon
    msgs = inst.messages
    if mode == "safe":
        total = sum(m.cost * th for m in msgs)
        return {g: total + eps for g in INFO_GROUPS}
    if mode == "local":
        return {
            "capacity": max(m.cost * (th - m.duration) for m in msgs) + eps,
            "connectivity": max((m.cost * l for m in msgs for l in m.times), default=0) + eps,
            "arrival": max(m.cost * th for m in msgs) + eps,
        }
    if mode == "empirical":
        total = 0.5 * sum(m.cost * sum(range(m.scheduled + m.duration, th + 1)) for m in msgs)
        return {g: total + eps for g in INFO_GROUPS}
    raise ContractError(f"unknown penalty mode {mode!r}")


def build_info_qubo(inst: InfoInstance, weights: Mapping[str, float] | None = None) -> ProblemInstance:
    th = inst.horizon
    b = QuboBuilder()
    x: dict[tuple[int, int, int], int] = {}
    for i, msg in enumerate(inst.messages):
        for v, t0 in zip(msg.path, msg.earliest()):
            for t in range(t0, th + 1):
                x[(i, t, v)] = b.var("x", i, t, v)

    at_node: dict[tuple[int, int], list[int]] = {}
    for (i, t, v), idx in x.items():
        at_node.setdefault((v, t), []).append(idx)
    slack = {}
    for (v, t) in sorted(at_node):
        bits = min(inst.capacity(v, t), len(at_node[(v, t)]))
        slack[(v, t)] = [b.var("s", k, t, v) for k in range(1, bits + 1)]

    for i, msg in enumerate(inst.messages):
        r = msg.recipient
        base = msg.scheduled + msg.duration
        for t in range(base, th + 1):
            b.add_linear(x[(i, t, r)], float(msg.cost * t))
        b.add_offset(-float(msg.cost * base))

    for (v, t), idxs in sorted(at_node.items()):
        coeffs = {idx: 1.0 for idx in idxs}
        for s in slack[(v, t)]:
            coeffs[s] = -1.0
        b.add_squared(coeffs, 0.0, "capacity", ("node_time", v, t))

    for i, msg in enumerate(inst.messages):
        early = msg.earliest()
        for j, l in enumerate(msg.times):
            u, w = msg.path[j], msg.path[j + 1]
            key = ("link", i, u, w)
            for t in range(early[j], th + 1):
                for t2 in range(early[j + 1], th + 1):
                    if t2 != t + l:
                        b.add_quadratic(x[(i, t, u)], x[(i, t2, w)], 1.0, "connectivity", key)

    for i, msg in enumerate(inst.messages):
        for v, t0 in zip(msg.path, msg.earliest()):
            b.add_squared({x[(i, t, v)]: 1.0 for t in range(t0, th + 1)}, -1.0,
                          "arrival", ("message_node", i, v))

    w = dict(weights) if weights is not None else penalty_weights(inst)
    qubo, objective, penalties, terms = b.finish(w, INFO_GROUPS)
    return ProblemInstance("info", inst, qubo, b.registry, objective, penalties, terms, w,
                           metadata={"name": inst.name})


def encode_info(pi: ProblemInstance, emissions) -> list[int]:
    """Binary assignment for the given emission times (slack filled to match load)."""
    inst: InfoInstance = pi.instance
    reg = pi.registry
    bits = [0] * len(reg)
    load: dict[tuple[int, int], int] = {}
    for i, (msg, t_em) in enumerate(zip(inst.messages, emissions)):
        for v, t in msg.arrivals(int(t_em)):
            label = ("x", i, t, v)
            if label not in reg:
                raise ContractError(f"message {i} cannot reach node {v} at time {t}")
            bits[reg.index(label)] = 1
            load[(v, t)] = load.get((v, t), 0) + 1
    for (v, t), count in load.items():
        for k in range(1, count + 1):
            label = ("s", k, t, v)
            if label not in reg:
                raise ContractError(f"capacity exceeded at node {v}, time {t}")
            bits[reg.index(label)] = 1
    return bits


def decode_info(x, pi: ProblemInstance) -> dict:
    """Emission times, delays and cost when feasible, otherwise a violation report."""
    report = pi.violation_report(x)
    if not report["feasible"]:
        return report
    inst: InfoInstance = pi.instance
    reg = pi.registry
    emissions = []
    for i, msg in enumerate(inst.messages):
        sender = msg.path[0]
        t_em = next(t for t in range(msg.scheduled, inst.horizon + 1)
                    if x[reg.index(("x", i, t, sender))])
        emissions.append(t_em)
    delays = [t - m.scheduled for t, m in zip(emissions, inst.messages)]
    cost = sum(m.cost * d for m, d in zip(inst.messages, delays))
    report.update(emissions=emissions, delays=delays, cost=cost)
    return report


def schedule_is_feasible(inst: InfoInstance, emissions) -> bool:
    load: dict[tuple[int, int], int] = {}
    for msg, t_em in zip(inst.messages, emissions):
        for v, t in msg.arrivals(t_em):
            load[(v, t)] = load.get((v, t), 0) + 1
    return all(c <= inst.capacity(v, t) for (v, t), c in load.items())


def info_oracle(inst: InfoInstance) -> tuple[int, list[int]] | None:
    """Exact minimum delay cost by enumerating emission-time tuples.

    Returns ``(cost, emissions)`` or ``None`` when no schedule fits the horizon.
    """
    windows = [inst.emission_window(i) for i in range(len(inst.messages))]
    size = math.prod(len(w) for w in windows)
    if size > ORACLE_MAX_SCHEDULES:
        raise ContractError(f"{size} emission tuples exceed the enumeration guard")
    load: dict[tuple[int, int], int] = {}
    best: list = [None, None]
    chosen: list[int] = []

    def rec(i, cost):
        if best[0] is not None and cost >= best[0]:
            return
        if i == len(inst.messages):
            best[0], best[1] = cost, list(chosen)
            return
        msg = inst.messages[i]
        for t_em in windows[i]:
            visits = msg.arrivals(t_em)
            if all(load.get(p, 0) < inst.capacity(*p) for p in visits):
                for p in visits:
                    load[p] = load.get(p, 0) + 1
                chosen.append(t_em)
                rec(i + 1, cost + msg.cost * (t_em - msg.scheduled))
                chosen.pop()
                for p in visits:
                    load[p] -= 1

    rec(0, 0)
    if best[0] is None:
        return None
    return best[0], best[1]


def with_oracle(pi: ProblemInstance) -> ProblemInstance:
    res = info_oracle(pi.instance)
    return pi.with_optimum(None if res is None else float(res[0]))


def conflict_points(inst: InfoInstance, emissions, i: int) -> set[tuple[int, int]]:
    """Node-times on message ``i``'s on-time route that the other messages saturate."""
    load: dict[tuple[int, int], int] = {}
    for j, (msg, t_em) in enumerate(zip(inst.messages, emissions)):
        if j == i:
            continue
        for p in msg.arrivals(t_em):
            load[p] = load.get(p, 0) + 1
    msg = inst.messages[i]
    return {p for p in msg.arrivals(msg.scheduled) if load.get(p, 0) >= inst.capacity(*p)}


def random_info_instance(rng, n_nodes: int = 3, n_messages: int = 2, max_hops: int = 1,
                         max_time: int = 1, max_cost: int = 3, horizon_slack: int = 1,
                         capacity: int = 1, name: str = "info") -> InfoInstance:
    """Random messages along sub-paths of a line network with uniform capacity."""
    edges = [(a, a + 1) for a in range(n_nodes - 1)]
    messages = []
    for _ in range(n_messages):
        hops = int(rng.integers(1, min(max_hops, n_nodes - 1) + 1))
        start = int(rng.integers(0, n_nodes - hops))
        path = list(range(start, start + hops + 1))
        if rng.random() < 0.5:
            path.reverse()
        times = [int(rng.integers(1, max_time + 1)) for _ in range(hops)]
        messages.append(Message(tuple(path), tuple(times), int(rng.integers(1, max_cost + 1)),
                                int(rng.integers(0, 2))))
    horizon = max(m.scheduled + m.duration for m in messages) + horizon_slack
    return InfoInstance(n_nodes, tuple(edges), tuple(messages), horizon,
                        capacity_default=capacity, name=name)
