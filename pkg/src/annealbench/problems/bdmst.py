"""Bounded-degree minimum spanning tree: level-based QUBO, decoder and oracle."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import networkx as nx

from ..validation import ContractError
from .base import ProblemInstance, QuboBuilder

BDMST_GROUPS = ("pen1", "pen2", "pen3", "pen4")
ORACLE_MAX_NODES = 9


@dataclass(frozen=True)
class BdMstInstance:
    n_nodes: int
    edges: tuple[tuple[int, int, int], ...]
    max_degree: int
    root: int | None = None
    epsilon: float = 0.5
    name: str = "bdmst"

    def __post_init__(self):
        edges = tuple(sorted((min(u, v), max(u, v), int(w)) for u, v, w in self.edges))
        object.__setattr__(self, "edges", edges)
        seen = set()
        for u, v, w in edges:
            if u == v or not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ContractError(f"invalid edge ({u}, {v})")
            if (u, v) in seen:
                raise ContractError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            if w < 1:
                raise ContractError("edge weights must be positive integers")
        if self.max_degree < 2:
            raise ContractError("degree bound must be at least 2")
        if self.epsilon <= 0:
            raise ContractError("epsilon must be positive")
        if self.root is not None and not 0 <= self.root < self.n_nodes:
            raise ContractError("root must be a vertex")
        if self.n_nodes < 1 or not nx.is_connected(self.graph()):
            raise ContractError("graph must be connected")

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_weighted_edges_from(self.edges)
        return g

    @property
    def root_vertex(self) -> int:
        """Explicit root, else the highest-degree vertex (lowest index on ties)."""
        if self.root is not None:
            return self.root
        g = self.graph()
        return max(range(self.n_nodes), key=lambda v: (g.degree(v), -v))

    @property
    def max_weight(self) -> int:
        return max(w for _, _, w in self.edges)


def level_preprocess(inst: BdMstInstance) -> dict[int, int]:
    """Smallest tree level each vertex can occupy: 1 + hop distance from the root."""
    g = inst.graph()
    if not nx.is_connected(g):
        raise ContractError("graph must be connected")
    dist = nx.single_source_shortest_path_length(g, inst.root_vertex)
    return {v: 1 + d for v, d in sorted(dist.items())}


def variable_count_bound(n: int, m: int, root_degree: int, max_degree: int) -> int:
    """Closed-form variable count of the build without level preprocessing."""
    return (2 * m - root_degree + (n - 1) ** 2 + n * (max_degree - 1) + 1
            + (2 * m - 2 * root_degree) * (n - 2))


def quadratize_terms(x: int, y: int, w: int, a: int):
    """Quadratic replacement for ``x*y*(1 - w)`` using ancilla ``a`` standing for ``x*y``.

    Returns ``(linear, quadratic)`` coefficient dicts of
    ``4a - a*w + x*y - 2a*x - 2a*y``.
    """
    linear = {a: 4.0}
    quadratic = {(a, w): -1.0, (x, y): 1.0, (a, x): -2.0, (a, y): -2.0}
    return linear, quadratic


def ancilla_penalty(x: int, y: int, a: int) -> int:
    """``3a + xy - 2ax - 2ay``: zero iff ``a == x*y`` on binary inputs."""
    return 3 * a + x * y - 2 * a * x - 2 * a * y


def quadratized_value(x: int, y: int, w: int, a: int) -> int:
    return 4 * a - a * w + x * y - 2 * a * x - 2 * a * y


def build_bdmst_qubo(inst: BdMstInstance, preprocess: bool = True) -> ProblemInstance:
    n, delta = inst.n_nodes, inst.max_degree
    root = inst.root_vertex
    g = inst.graph()
    if preprocess:
        min_level = level_preprocess(inst)
    else:
        min_level = {v: (1 if v == root else 2) for v in range(n)}
    weight = {}
    for u, v, w in inst.edges:
        weight[(u, v)] = weight[(v, u)] = w

    b = QuboBuilder()
    x = {}
    for u, v, _ in inst.edges:
        for p, c in ((u, v), (v, u)):
            if c != root:
                x[(p, c)] = b.var("x", p, c)
    y = {}
    for v in range(n):
        if v == root:
            continue
        for lvl in range(min_level[v], n + 1):
            y[(v, lvl)] = b.var("y", v, lvl)
    z = {}
    for p in range(n):
        for j in range(1, (delta if p == root else delta - 1) + 1):
            z[(p, j)] = b.var("z", p, j)

    for (p, c), idx in x.items():
        b.add_linear(idx, float(weight[(p, c)]))

    for v in range(n):
        if v == root:
            continue
        parents = {x[(p, v)]: 1.0 for p in sorted(g.neighbors(v)) if (p, v) in x}
        b.add_squared(parents, -1.0, "pen1", ("node", v))
        levels = {y[(v, lvl)]: 1.0 for lvl in range(min_level[v], n + 1)}
        b.add_squared(levels, -1.0, "pen2", ("node", v))

    for p in range(n):
        coeffs = {x[(p, c)]: 1.0 for c in sorted(g.neighbors(p)) if (p, c) in x}
        for j in range(1, (delta if p == root else delta - 1) + 1):
            coeffs[z[(p, j)]] = -1.0
        b.add_squared(coeffs, 0.0, "pen3", ("node", p))

    # root edges: x_{r,v} and y_{v,2} must agree; y_{v,2} without a root edge is forbidden
    for v in range(n):
        if v == root or (v, 2) not in y:
            continue
        key = ("root", v)
        yv2 = y[(v, 2)]
        if (root, v) in x:
            xr = x[(root, v)]
            b.add_linear(xr, 1.0, "pen4", key)
            b.add_linear(yv2, 1.0, "pen4", key)
            b.add_quadratic(xr, yv2, -2.0, "pen4", key)
        else:
            b.add_linear(yv2, 1.0, "pen4", key)

    ancillas = []
    for (p, c), xi in x.items():
        if p == root:
            continue
        for lvl in range(max(3, min_level[c]), n + 1):
            yi = y[(c, lvl)]
            key = ("edge", p, c, lvl)
            if (p, lvl - 1) in y:
                ancillas.append((p, c, lvl, xi, yi, y[(p, lvl - 1)]))
            else:
                # parent can never sit at lvl-1, so the cubic term is just x*y
                b.add_quadratic(xi, yi, 1.0, "pen4", key)
    for p, c, lvl, xi, yi, wi in ancillas:
        a = b.var("a", p, c, lvl)
        lin, quad = quadratize_terms(xi, yi, wi, a)
        key = ("edge", p, c, lvl)
        for i, v in lin.items():
            b.add_linear(i, v, "pen4", key)
        for (i, j), v in quad.items():
            b.add_quadratic(i, j, v, "pen4", key)

    A = inst.max_weight + inst.epsilon
    weights = {gname: A for gname in BDMST_GROUPS}
    qubo, objective, penalties, terms = b.finish(weights, BDMST_GROUPS)
    return ProblemInstance(
        "bdmst", inst, qubo, b.registry, objective, penalties, terms, weights,
        metadata={"name": inst.name, "root": root, "preprocess": preprocess,
                  "min_level": min_level},
    )


def encode_bdmst(pi: ProblemInstance, tree_edges) -> list[int]:
    """Binary assignment representing a spanning tree (slack and ancillas filled in)."""
    inst: BdMstInstance = pi.instance
    root = pi.metadata["root"]
    tree_edges = list(tree_edges)
    if len(tree_edges) != inst.n_nodes - 1:
        raise ContractError("edge set is not a spanning tree")
    adj = {v: [] for v in range(inst.n_nodes)}
    for u, v in tree_edges:
        adj[u].append(v)
        adj[v].append(u)
    parent, level = {root: None}, {root: 1}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(adj[u]):
            if v not in level:
                parent[v], level[v] = u, level[u] + 1
                queue.append(v)
    if len(level) != inst.n_nodes:
        raise ContractError("edge set is not a spanning tree")
    reg = pi.registry
    bits = [0] * len(reg)
    children = {p: 0 for p in range(inst.n_nodes)}
    for v, p in parent.items():
        if p is None:
            continue
        bits[reg.index(("x", p, v))] = 1
        label = ("y", v, level[v])
        if label not in reg:
            raise ContractError(f"vertex {v} at level {level[v]} was pruned")
        bits[reg.index(label)] = 1
        children[p] += 1
    for p, k in children.items():
        for j in range(1, k + 1):
            label = ("z", p, j)
            if label not in reg:
                raise ContractError(f"vertex {p} exceeds the degree bound")
            bits[reg.index(label)] = 1
    for label in reg.labels("a"):
        _, p, v, lvl = label
        bits[reg.index(label)] = bits[reg.index(("x", p, v))] * bits[reg.index(("y", v, lvl))]
    return bits


def decode_bdmst(x, pi: ProblemInstance) -> dict:
    """Tree edges when every penalty group vanishes, otherwise a violation report."""
    report = pi.violation_report(x)
    if not report["feasible"]:
        return report
    edges = sorted(tuple(sorted((p, v))) for (_, p, v), bit in
                   ((lab, x[pi.registry.index(lab)]) for lab in pi.registry.labels("x")) if bit)
    weight = pi.objective_value(x)
    return {"feasible": True, "violations": {}, "edges": [list(e) for e in edges],
            "weight": weight}


def bdmst_oracle(inst: BdMstInstance) -> int | None:
    """Exact minimum weight over spanning trees with max degree <= bound; ``None`` if none.

    Branch and bound over edges in weight order, independent of the QUBO.
    """
    n = inst.n_nodes
    if n > ORACLE_MAX_NODES:
        raise ContractError(f"oracle limited to {ORACLE_MAX_NODES} nodes, got {n}")
    if n == 1:
        return 0
    edges = sorted(inst.edges, key=lambda e: (e[2], e[0], e[1]))
    m = len(edges)
    need_total = n - 1
    best = [None]
    degree = [0] * n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    def lower_bound(i, need):
        return sum(e[2] for e in edges[i:i + need])

    def rec(i, chosen, weight):
        need = need_total - chosen
        if need == 0:
            if best[0] is None or weight < best[0]:
                best[0] = weight
            return
        if m - i < need:
            return
        if best[0] is not None and weight + lower_bound(i, need) >= best[0]:
            return
        u, v, w = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv and degree[u] < inst.max_degree and degree[v] < inst.max_degree:
            parent[ru] = rv
            degree[u] += 1
            degree[v] += 1
            rec(i + 1, chosen + 1, weight + w)
            degree[u] -= 1
            degree[v] -= 1
            parent[ru] = ru
        rec(i + 1, chosen, weight)

    rec(0, 0, 0)
    return best[0]


def spanning_trees(inst: BdMstInstance) -> list[tuple[int, list[tuple[int, int]]]]:
    """Every spanning tree within the degree bound as ``(weight, edges)``; small graphs only."""
    from itertools import combinations

    n = inst.n_nodes
    if n > 7:
        raise ContractError("exhaustive tree listing limited to 7 nodes")
    out = []
    for combo in combinations(inst.edges, n - 1):
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from((u, v) for u, v, _ in combo)
        if nx.is_tree(g) and max(d for _, d in g.degree) <= inst.max_degree:
            out.append((sum(w for *_, w in combo), [(u, v) for u, v, _ in combo]))
    return sorted(out)


def with_oracle(pi: ProblemInstance) -> ProblemInstance:
    opt = bdmst_oracle(pi.instance)
    if opt is None:
        return pi.with_optimum(None)
    return pi.with_optimum(float(opt))


def random_bdmst_instance(rng, n_nodes: int, edge_prob: float = 0.6, max_weight: int = 7,
                          max_degree: int = 3, name: str = "bdmst") -> BdMstInstance:
    """Connected random graph with integer weights in ``[1, max_weight]``."""
    while True:
        g = nx.gnp_random_graph(n_nodes, edge_prob, seed=int(rng.integers(2**31)))
        if nx.is_connected(g):
            break
    edges: Sequence = [(u, v, int(rng.integers(1, max_weight + 1))) for u, v in g.edges]
    return BdMstInstance(n_nodes, tuple(edges), max_degree, name=name)
