"""Graph colouring with one-hot encoding."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx
import numpy as np

from ..validation import ContractError
from .base import ProblemInstance, QuboBuilder

GC_GROUPS = ("one_hot", "conflict")
ORACLE_MAX_COLORINGS = 10**7


@dataclass(frozen=True)
class GcInstance:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    colors: int
    name: str = "gc"

    def __post_init__(self):
        edges = tuple(sorted({(min(u, v), max(u, v)) for u, v in self.edges}))
        for u, v in edges:
            if u == v or not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ContractError(f"invalid edge ({u}, {v})")
        object.__setattr__(self, "edges", edges)
        if self.colors < 1:
            raise ContractError("need at least one colour")

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(self.edges)
        return g


def build_gc_qubo(inst: GcInstance) -> ProblemInstance:
    """``sum_v (1 - sum_i x_vi)^2 + sum_(uv) sum_i x_ui x_vi``; no penalty weight."""
    b = QuboBuilder()
    x = {(v, i): b.var("x", v, i) for v in range(inst.n_nodes) for i in range(inst.colors)}
    for v in range(inst.n_nodes):
        b.add_squared({x[(v, i)]: 1.0 for i in range(inst.colors)}, -1.0, "one_hot", ("node", v))
    for u, v in inst.edges:
        for i in range(inst.colors):
            b.add_quadratic(x[(u, i)], x[(v, i)], 1.0, "conflict", ("edge", u, v))
    weights = {g: 1.0 for g in GC_GROUPS}
    qubo, objective, penalties, terms = b.finish(weights, GC_GROUPS)
    return ProblemInstance("gc", inst, qubo, b.registry, objective, penalties, terms, weights,
                           metadata={"name": inst.name})


def encode_gc(pi: ProblemInstance, coloring) -> list[int]:
    bits = [0] * pi.n_vars
    for v, c in enumerate(coloring):
        bits[pi.registry.index(("x", v, int(c)))] = 1
    return bits


def decode_gc(x, pi: ProblemInstance) -> dict:
    """Colour per node when one-hot holds everywhere, plus conflicting edges."""
    report = pi.violation_report(x)
    inst: GcInstance = pi.instance
    if "one_hot" in report["violations"]:
        return report
    coloring = [next(i for i in range(inst.colors) if x[pi.registry.index(("x", v, i))])
                for v in range(inst.n_nodes)]
    report["coloring"] = coloring
    return report


def gc_oracle(inst: GcInstance) -> int:
    """Minimum number of monochromatic edges over all ``k**n`` colourings."""
    n, k = inst.n_nodes, inst.colors
    if k**n > ORACLE_MAX_COLORINGS:
        raise ContractError(f"k**n = {k**n} exceeds the enumeration guard {ORACLE_MAX_COLORINGS}")
    if not inst.edges:
        return 0
    edges = np.array(inst.edges)
    best = len(inst.edges)
    # chunk over the leading nodes so memory stays bounded
    lead = max(0, n - 12)
    tail = np.array(list(itertools.product(range(k), repeat=n - lead)), dtype=np.int8)
    for head in itertools.product(range(k), repeat=lead):
        cols = np.hstack([np.tile(np.array(head, dtype=np.int8), (len(tail), 1)), tail])
        conflicts = (cols[:, edges[:, 0]] == cols[:, edges[:, 1]]).sum(axis=1)
        best = min(best, int(conflicts.min()))
        if best == 0:
            break
    return best


def count_proper_colorings(inst: GcInstance) -> int:
    n, k = inst.n_nodes, inst.colors
    if k**n > ORACLE_MAX_COLORINGS:
        raise ContractError("enumeration guard exceeded")
    cols = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int8).reshape(-1, n)
    if not inst.edges:
        return len(cols)
    edges = np.array(inst.edges)
    return int(((cols[:, edges[:, 0]] == cols[:, edges[:, 1]]).sum(axis=1) == 0).sum())


def proper_coloring(inst: GcInstance):
    """A proper colouring with at most k colours, or ``None`` when none exists.

    DSatur supplies a certificate cheaply; exhaustive search settles the rest.
    """
    greedy = nx.greedy_color(inst.graph(), strategy="DSATUR")
    if max(greedy.values(), default=0) < inst.colors:
        return [greedy[v] for v in range(inst.n_nodes)]
    n, k = inst.n_nodes, inst.colors
    if k**n > ORACLE_MAX_COLORINGS:
        raise ContractError("colourability undecided within the enumeration guard")
    for cols in itertools.product(range(k), repeat=n):
        if all(cols[u] != cols[v] for u, v in inst.edges):
            return list(cols)
    return None


def with_oracle(pi: ProblemInstance) -> ProblemInstance:
    """All GC terms are penalties: success means a proper colouring (energy 0)."""
    if proper_coloring(pi.instance) is None:
        return pi.with_optimum(None)
    return pi.with_optimum(0.0)


def random_regular_gc(rng, n_nodes: int = 12, degree: int = 4, colors: int = 5,
                      name: str = "gc") -> GcInstance:
    g = nx.random_regular_graph(degree, n_nodes, seed=int(rng.integers(2**31)))
    return GcInstance(n_nodes, tuple(g.edges), colors, name=name)
