"""Chimera and Pegasus hardware graphs with optional dead-qubit masks."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np

from .validation import ContractError

# Pegasus internal-coupler shifts for vertical (S0) and horizontal (S1) qubits
PEGASUS_S0 = (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6)
PEGASUS_S1 = (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10)


@dataclass(frozen=True)
class HardwareGraph:
    """Qubits and couplers of an annealer; ``dead`` records masked-out qubits."""

    family: str
    m: int
    qubits: tuple[int, ...]
    couplers: tuple[tuple[int, int], ...]
    dead: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        qubits = tuple(sorted(set(int(q) for q in self.qubits)))
        couplers = tuple(sorted({(min(a, b), max(a, b)) for a, b in self.couplers}))
        live = set(qubits)
        for a, b in couplers:
            if a == b:
                raise ContractError(f"self-loop on qubit {a}")
            if a not in live or b not in live:
                raise ContractError(f"coupler ({a}, {b}) references a missing qubit")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "couplers", couplers)
        object.__setattr__(self, "dead", frozenset(int(q) for q in self.dead))

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.qubits)
        g.add_edges_from(self.couplers)
        return g

    def degrees(self) -> dict[int, int]:
        return dict(self.graph.degree())

    def degree_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for d in self.degrees().values():
            hist[d] = hist.get(d, 0) + 1
        return dict(sorted(hist.items()))

    def without(self, qubits) -> "HardwareGraph":
        """Copy with the given qubits (and their couplers) marked dead."""
        drop = set(int(q) for q in qubits)
        keep = [q for q in self.qubits if q not in drop]
        couplers = [(a, b) for a, b in self.couplers if a not in drop and b not in drop]
        return HardwareGraph(self.family, self.m, tuple(keep), tuple(couplers), self.dead | drop)

    def with_random_dead(self, n_dead: int, seed=None) -> "HardwareGraph":
        rng = np.random.default_rng(seed)
        if not 0 <= n_dead <= self.n_qubits:
            raise ContractError("n_dead outside [0, n_qubits]")
        return self.without(rng.choice(np.array(self.qubits), size=n_dead, replace=False).tolist())

    def to_dict(self) -> dict:
        return {"family": self.family, "m": self.m, "dead": sorted(self.dead),
                "qubits": list(self.qubits), "couplers": [list(c) for c in self.couplers]}

    @classmethod
    def from_dict(cls, data) -> "HardwareGraph":
        family, m, dead = data["family"], int(data["m"]), data.get("dead", [])
        if family in ("chimera", "pegasus") and "couplers" not in data:
            base = chimera_graph(m) if family == "chimera" else pegasus_graph(m)
            return base.without(dead)
        return cls(family, m, tuple(data["qubits"]), tuple(tuple(c) for c in data["couplers"]),
                   frozenset(dead))


def custom_graph(g: nx.Graph, name: str = "custom") -> HardwareGraph:
    return HardwareGraph(name, 0, tuple(g.nodes), tuple(g.edges))


def chimera_index(m: int, i: int, j: int, u: int, k: int) -> int:
    return ((i * m + j) * 2 + u) * 4 + k


def chimera_coordinates(m: int, q: int) -> tuple[int, int, int, int]:
    k = q % 4
    u = (q // 4) % 2
    cell = q // 8
    return cell // m, cell % m, u, k


def chimera_graph(m: int) -> HardwareGraph:
    """C_m: an m x m grid of K_{4,4} cells with 8 m^2 qubits.

    Inside a cell every vertical (u=0) qubit couples to every horizontal (u=1)
    qubit; vertical qubits also couple to the same slot one row down and
    horizontal qubits to the same slot one column right.
    """
    if m < 1:
        raise ContractError("chimera size m must be >= 1")
    couplers = []
    for i in range(m):
        for j in range(m):
            for k in range(4):
                for k2 in range(4):
                    couplers.append((chimera_index(m, i, j, 0, k), chimera_index(m, i, j, 1, k2)))
                if i + 1 < m:
                    couplers.append((chimera_index(m, i, j, 0, k), chimera_index(m, i + 1, j, 0, k)))
                if j + 1 < m:
                    couplers.append((chimera_index(m, i, j, 1, k), chimera_index(m, i, j + 1, 1, k)))
    return HardwareGraph("chimera", m, tuple(range(8 * m * m)), tuple(couplers))


def pegasus_index(m: int, u: int, w: int, k: int, z: int) -> int:
    return ((u * m + w) * 12 + k) * (m - 1) + z


def pegasus_coordinates(m: int, q: int) -> tuple[int, int, int, int]:
    q, z = divmod(q, m - 1)
    q, k = divmod(q, 12)
    u, w = divmod(q, m)
    return u, w, k, z


def pegasus_graph(m: int) -> HardwareGraph:
    """P_m over the full 24 m (m - 1) coordinate set ``(u, w, k, z)``.

    Couplers: external ``z ~ z + 1`` along a line, odd pairs ``k = 2j ~ 2j + 1``,
    and internal couplers between vertical and horizontal qubits whose segments
    cross, located with the standard shift tables.
    """
    if m < 2:
        raise ContractError("pegasus size m must be >= 2")
    idx = lambda u, w, k, z: pegasus_index(m, u, w, k, z)  # noqa: E731
    couplers = []
    for u in (0, 1):
        for w in range(m):
            for k in range(12):
                for z in range(m - 1):
                    if z + 1 < m - 1:
                        couplers.append((idx(u, w, k, z), idx(u, w, k, z + 1)))
                    if k % 2 == 0:
                        couplers.append((idx(u, w, k, z), idx(u, w, k + 1, z)))
    for w0 in range(m):
        for k0 in range(12):
            for z0 in range(m - 1):
                for k1 in range(12):
                    w1 = z0 + (1 if k1 < PEGASUS_S0[k0] else 0)
                    z1 = w0 - (1 if k0 < PEGASUS_S1[k1] else 0)
                    if 0 <= w1 < m and 0 <= z1 < m - 1:
                        couplers.append((idx(0, w0, k0, z0), idx(1, w1, k1, z1)))
    return HardwareGraph("pegasus", m, tuple(range(24 * m * (m - 1))), tuple(couplers))


def chimera_to_pegasus(m: int, q: int) -> int:
    """Map a qubit of C_{m-1} into P_m so that every Chimera coupler lands on a coupler."""
    y, x, u, k = chimera_coordinates(m - 1, q)
    if u:
        return pegasus_index(m, 1, y + 1, 4 + k, x)
    return pegasus_index(m, 0, x, 4 + k, y)


def build_hardware(family: str, m: int, dead=()) -> HardwareGraph:
    if family == "chimera":
        g = chimera_graph(m)
    elif family == "pegasus":
        g = pegasus_graph(m)
    else:
        raise ContractError(f"unknown hardware family {family!r}")
    return g.without(dead) if dead else g
