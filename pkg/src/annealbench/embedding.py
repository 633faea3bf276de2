"""Minor embedding, coefficient splitting, diagnostics and unembedding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from sklearn.base import BaseEstimator

from .ising import IsingModel, QuboModel, qubo_to_ising
from .topology import HardwareGraph
from .validation import ContractError, check_seed

POLICIES = ("discard", "majority_vote")


class EmbeddingError(RuntimeError):
    """No valid embedding was found."""


@dataclass(frozen=True)
class Embedding:
    """Logical variable -> sorted tuple of physical qubits (its vertex model)."""

    models: Mapping[int, tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "models", {int(v): tuple(sorted(int(q) for q in qs))
                                            for v, qs in sorted(dict(self.models).items())})

    def __getitem__(self, v) -> tuple[int, ...]:
        return self.models[v]

    def __len__(self) -> int:
        return len(self.models)

    @property
    def qubits(self) -> list[int]:
        return sorted(q for qs in self.models.values() for q in qs)

    @property
    def n_qubits(self) -> int:
        return sum(len(qs) for qs in self.models.values())

    def sizes(self) -> dict[int, int]:
        return {v: len(qs) for v, qs in self.models.items()}

    def to_dict(self) -> dict[str, list[int]]:
        return {str(v): list(qs) for v, qs in self.models.items()}

    @classmethod
    def from_dict(cls, data) -> "Embedding":
        return cls({int(v): tuple(qs) for v, qs in data.items()})

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1))
        return path

    @classmethod
    def load(cls, path) -> "Embedding":
        return cls.from_dict(json.loads(Path(path).read_text()))


def interaction_graph(model) -> nx.Graph:
    """Logical graph of a problem, QUBO/Ising model, or a graph passed through."""
    if isinstance(model, nx.Graph):
        return model
    if hasattr(model, "qubo"):
        model = model.qubo
    if not isinstance(model, (QuboModel, IsingModel)):
        raise ContractError(f"cannot derive an interaction graph from {type(model).__name__}")
    g = nx.Graph()
    g.add_nodes_from(range(model.size))
    g.add_edges_from(model._terms()[1].keys())
    return g


def verify_embedding(emb: Embedding, logical: nx.Graph, hardware: HardwareGraph) -> list[dict]:
    """Return a list of violations; empty means the embedding is valid."""
    out: list[dict] = []
    hw = hardware.graph
    owner: dict[int, int] = {}
    for v in logical.nodes:
        if v not in emb.models:
            out.append({"kind": "missing_vertex", "vertex": v})
        elif not emb.models[v]:
            out.append({"kind": "empty_model", "vertex": v})
    for v, qs in emb.models.items():
        for q in qs:
            if q not in hw:
                out.append({"kind": "unknown_qubit", "vertex": v, "qubit": q})
            elif q in owner:
                out.append({"kind": "overlap", "vertices": [owner[q], v], "qubit": q})
            else:
                owner[q] = v
        present = [q for q in qs if q in hw]
        if present and not nx.is_connected(hw.subgraph(present)):
            out.append({"kind": "disconnected", "vertex": v})
    for a, b in logical.edges:
        if a == b or a not in emb.models or b not in emb.models:
            continue
        mb = set(emb.models[b])
        if not any(n in mb for q in emb.models[a] if q in hw for n in hw[q]):
            out.append({"kind": "missing_coupler", "edge": [a, b]})
    return out


class _Search:
    """One randomized run of chain growth with escalating overlap penalties."""

    def __init__(self, adj: list[list[int]], hw: csr_matrix, rng: np.random.Generator,
                 max_rounds: int, polish: int = 8, patience: int = 8):
        self.adj = adj
        self.polish = polish
        self.patience = patience
        self.hw = hw
        self.n = hw.shape[0]
        self.rng = rng
        self.max_rounds = max_rounds
        self.usage = np.zeros(self.n, dtype=np.int64)
        self.models: list[np.ndarray | None] = [None] * len(adj)

    def _weights(self, alpha: float) -> np.ndarray:
        return np.power(float(alpha), np.minimum(self.usage, 60).astype(float))

    def _place(self, v: int, alpha: float) -> np.ndarray:
        w = self._weights(alpha)
        nbrs = [u for u in self.adj[v] if self.models[u] is not None]
        if not nbrs:
            cand = np.flatnonzero(self.usage == self.usage.min())
            return np.array([self.rng.choice(cand)])
        graph = csr_matrix((w[self.hw.indices], self.hw.indices, self.hw.indptr), shape=self.hw.shape)
        total = w + self.rng.random(self.n) * 1e-7
        preds = []
        for u in nbrs:
            d, p, _ = dijkstra(graph, directed=True, indices=self.models[u],
                            return_predecessors=True, min_only=True)
            total = total + np.maximum(d - w, 0.0)
            preds.append((set(self.models[u].tolist()), p))
        root = int(np.argmin(total))
        if not np.isfinite(total[root]):
            raise EmbeddingError("hardware graph is disconnected from a neighbour model")
        chain = {root}
        for members, p in preds:
            x = root
            while x not in members:
                chain.add(x)
                x = int(p[x])
        return np.array(sorted(chain))

    def _set(self, v, model):
        if self.models[v] is not None:
            self.usage[self.models[v]] -= 1
        self.models[v] = model
        if model is not None:
            self.usage[model] += 1

    def _order(self) -> list[int]:
        n = len(self.adj)
        seen = np.zeros(n, dtype=bool)
        order = []
        for start in self.rng.permutation(n):
            if seen[start]:
                continue
            stack = [int(start)]
            seen[start] = True
            while stack:
                v = stack.pop(0)
                order.append(v)
                nb = [u for u in self.adj[v] if not seen[u]]
                self.rng.shuffle(nb)
                for u in nb:
                    seen[u] = True
                    stack.append(u)
        return order

    def _shake(self, order) -> None:
        """Tear out overlapping chains and their neighbours, then re-place them cheaply."""
        bad = {v for v in order if (self.usage[self.models[v]] > 1).any()}
        rip = set(bad)
        for v in bad:
            rip.update(self.adj[v])
        for v in rip:
            self._set(v, None)
        for v in self.rng.permutation(sorted(rip)):
            self._set(v, self._place(int(v), 2.0))

    def run(self) -> list[np.ndarray] | None:
        order = self._order()
        for v in order:
            self._set(v, self._place(v, 2.0))
        ok = False
        best, stall, step = np.inf, 0, 0
        for _ in range(self.max_rounds):
            over = int((self.usage > 1).sum())
            if over == 0:
                ok = True
                break
            if over < best:
                best, stall = over, 0
            else:
                stall += 1
            if stall >= self.patience:
                self._shake(order)
                best, stall, step = np.inf, 0, 0
            alpha = min(2.0 ** (1 + step / 6), 1e6)
            step += 1
            for v in self.rng.permutation(order):
                self._set(v, None)
                self._set(v, self._place(v, alpha))
        if not ok and self.usage.max() > 1:
            return None
        big = float(10 * self.n)
        for _ in range(self.polish):
            improved = False
            for v in self.rng.permutation(order):
                old = self.models[v]
                self._set(v, None)
                new = self._place(v, big)
                self._set(v, new)
                if self.usage.max() > 1 or len(new) > len(old):
                    self._set(v, old)
                elif len(new) < len(old):
                    improved = True
            if not improved:
                break
        return [m.copy() for m in self.models]


def _trim(models: list[set], adj: list[list[int]], hw: nx.Graph) -> None:
    """Drop qubits that are not needed for connectivity or logical couplers."""
    changed = True
    while changed:
        changed = False
        for v, model in enumerate(models):
            if len(model) == 1:
                continue
            for q in sorted(model):
                rest = model - {q}
                if not nx.is_connected(hw.subgraph(rest)):
                    continue
                if all(any(n in models[u] for r in rest for n in hw[r]) for u in adj[v]):
                    model.discard(q)
                    changed = True
                    if len(model) == 1:
                        break


def _identity_embedding(logical: nx.Graph, hardware: HardwareGraph) -> Embedding | None:
    hw = hardware.graph
    if all(v in hw for v in logical.nodes) and all(hw.has_edge(a, b) for a, b in logical.edges):
        return Embedding({v: (v,) for v in logical.nodes})
    return None


def find_embedding(logical, hardware: HardwareGraph, tries: int = 10, seed=None,
                   max_rounds: int = 400) -> Embedding:
    """Smallest embedding over ``tries`` randomized chain-growth runs.

    Each run places variables in a random BFS order, routing every new chain
    to its placed neighbours along shortest paths whose qubit costs grow
    exponentially with overlap, then re-routes with rising penalties until
    chains are disjoint. Chains are then trimmed. Runs use seeds spawned from
    ``seed``; ties in total qubit count go to the lowest try index.
    """
    logical = interaction_graph(logical)
    if tries < 1:
        raise ContractError("tries must be >= 1")
    ident = _identity_embedding(logical, hardware)
    if ident is not None:
        return ident
    nodes = sorted(logical.nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    adj = [sorted(pos[u] for u in logical[v] if u != v) for v in nodes]
    # chains grown outside the main fabric could never reach their neighbours
    qubits = sorted(max(nx.connected_components(hardware.graph), key=len))
    qpos = {q: i for i, q in enumerate(qubits)}
    hw_local = nx.relabel_nodes(hardware.graph.subgraph(qubits), qpos)
    edges = np.array(list(hw_local.edges), dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    hw_csr = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(qubits), len(qubits)))
    hw_csr.sort_indices()
    best: Embedding | None = None
    for child in check_seed(seed).spawn(tries):
        found = _Search(adj, hw_csr, np.random.default_rng(child), max_rounds).run()
        if found is None:
            continue
        sets = [set(m.tolist()) for m in found]
        _trim(sets, adj, hw_local)
        emb = Embedding({nodes[i]: tuple(qubits[q] for q in s) for i, s in enumerate(sets)})
        if verify_embedding(emb, logical, hardware):
            continue
        if best is None or emb.n_qubits < best.n_qubits:
            best = emb
    if best is None:
        raise EmbeddingError(f"no embedding found in {tries} tries")
    return best


@dataclass(frozen=True, eq=False)
class EmbeddedProblem:
    """Physical Ising model over ``qubits`` (compact indices follow that list)."""

    ising: IsingModel
    logical: IsingModel
    embedding: Embedding
    qubits: tuple[int, ...]
    chain_strength: float
    provenance: Mapping[tuple[int, int], tuple]
    chain_couplers: tuple[tuple[int, int], ...]
    problem: object = None
    hardware: HardwareGraph | None = None

    @property
    def chain_constant(self) -> float:
        """Energy of the chain couplers when every vertex model is aligned."""
        return -self.chain_strength * len(self.chain_couplers)

    def model_indices(self) -> dict[int, np.ndarray]:
        pos = {q: i for i, q in enumerate(self.qubits)}
        return {v: np.array([pos[q] for q in qs]) for v, qs in self.embedding.models.items()}

    def aligned(self, logical_spins) -> np.ndarray:
        """Physical configuration with each model set to its logical spin."""
        spins = np.atleast_2d(np.asarray(logical_spins))
        out = np.empty((spins.shape[0], len(self.qubits)), dtype=np.int8)
        for v, idx in self.model_indices().items():
            out[:, idx] = spins[:, [v]]
        return out if np.ndim(logical_spins) > 1 else out[0]


def embed_problem(problem, emb: Embedding, chain_strength: float,
                  hardware: HardwareGraph) -> EmbeddedProblem:
    """Split logical fields and couplings evenly and add ``-|J_F|`` on every intra-model coupler."""
    if chain_strength <= 0:
        raise ContractError("|J_F| must be positive")
    model = problem.qubo if hasattr(problem, "qubo") else problem
    logical_ising = qubo_to_ising(model) if isinstance(model, QuboModel) else model
    logical = interaction_graph(logical_ising)
    bad = verify_embedding(emb, logical, hardware)
    if bad:
        raise ContractError(f"invalid embedding: {bad[:3]}")
    hw = hardware.graph
    qubits = tuple(sorted(q for v in logical.nodes for q in emb.models[v]))
    pos = {q: i for i, q in enumerate(qubits)}
    owner = {q: v for v in logical.nodes for q in emb.models[v]}
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    prov: dict[tuple[int, int], tuple] = {}
    for v, hv in logical_ising.h.items():
        share = hv / len(emb.models[v])
        for q in emb.models[v]:
            h[pos[q]] = h.get(pos[q], 0.0) + share
    chains = []
    for v in logical.nodes:
        members = emb.models[v]
        for q in members:
            for n in hw[q]:
                if n > q and owner.get(n) == v:
                    key = (pos[q], pos[n])
                    J[key] = -abs(chain_strength)
                    prov[key] = ("chain", v)
                    chains.append(key)
    for (a, b), jab in logical_ising.J.items():
        mb = set(emb.models[b])
        couplers = sorted({tuple(sorted((pos[q], pos[n]))) for q in emb.models[a] for n in hw[q] if n in mb})
        for key in couplers:
            J[key] = J.get(key, 0.0) + jab / len(couplers)
            prov[key] = ("edge", a, b)
    ising = IsingModel(len(qubits), h, J, logical_ising.offset)
    return EmbeddedProblem(ising, logical_ising, emb, qubits, abs(chain_strength), prov,
                           tuple(sorted(chains)), problem, hardware)


@dataclass(frozen=True)
class EmbeddingDiagnostics:
    R_J: float | None
    R_h: float | None
    distinct_J: int
    distinct_h: int
    chain_mean: float
    chain_median: float
    chain_max: int
    avg_logical_degree: float
    physical_qubits: int
    logical_vars: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _distinct(values: np.ndarray, granularity: float) -> int:
    if values.size == 0:
        return 0
    return int(np.unique(np.round(np.abs(values) / granularity)).size)


def _ratio(values: np.ndarray) -> float | None:
    a = np.abs(values)
    a = a[a > 0]
    if a.size == 0:
        return None
    return float(a.max() / a.min())


def diagnostics(ep: EmbeddedProblem, granularity: float = 1e-9) -> EmbeddingDiagnostics:
    """Coefficient-range and heterogeneity statistics excluding the chain couplers."""
    chain = set(ep.chain_couplers)
    jvals = np.array([v for k, v in ep.ising.J.items() if k not in chain and v != 0.0])
    hvals = np.array([v for v in ep.ising.h.values() if v != 0.0])
    sizes = np.array([len(qs) for qs in ep.embedding.models.values()])
    logical = interaction_graph(ep.logical)
    degs = [d for _, d in logical.degree()]
    return EmbeddingDiagnostics(
        _ratio(jvals), _ratio(hvals), _distinct(jvals, granularity), _distinct(hvals, granularity),
        float(sizes.mean()), float(np.median(sizes)), int(sizes.max()),
        float(np.mean(degs)) if degs else 0.0, len(ep.qubits), ep.logical.n_spins)


@dataclass
class UnembedResult:
    samples: np.ndarray
    energies: np.ndarray
    broken: np.ndarray
    kept: np.ndarray
    broken_fraction: float
    policy: str


def unembed(samples, ep: EmbeddedProblem, policy: str = "discard", seed=None) -> UnembedResult:
    """Map physical samples back to logical spins.

    ``discard`` drops every sample with a broken vertex model. ``majority_vote``
    takes each model's majority spin, breaking exact ties with a seeded coin.
    ``broken`` flags samples with at least one broken model in either case.
    """
    if policy not in POLICIES:
        raise ContractError(f"policy must be one of {POLICIES}")
    X = np.atleast_2d(np.asarray(samples, dtype=np.int8))
    if X.shape[1] != len(ep.qubits):
        raise ContractError("samples do not match the embedded problem's qubits")
    n_log = ep.logical.n_spins
    out = np.empty((X.shape[0], n_log), dtype=np.int8)
    broken = np.zeros(X.shape[0], dtype=bool)
    rng = np.random.default_rng(check_seed(seed))
    for v, idx in ep.model_indices().items():
        total = X[:, idx].astype(np.int64).sum(axis=1)
        broken |= np.abs(total) != len(idx)
        vote = np.sign(total).astype(np.int8)
        ties = vote == 0
        if ties.any():
            vote[ties] = rng.choice(np.array([-1, 1], dtype=np.int8), size=int(ties.sum()))
        out[:, v] = vote
    frac = float(broken.mean()) if X.shape[0] else 0.0
    kept = np.flatnonzero(~broken) if policy == "discard" else np.arange(X.shape[0])
    logical = out[kept]
    energies = ep.logical.energies(logical) if len(logical) else np.zeros(0)
    return UnembedResult(logical, energies, broken, kept, frac, policy)


class MinorEmbedder(BaseEstimator):
    """Estimator wrapper: ``fit`` finds an embedding, ``transform`` embeds a problem,
    ``inverse_transform`` unembeds physical samples."""

    def __init__(self, hardware: HardwareGraph | None = None, tries: int = 10, seed=None,
                 chain_strength: float = 1.0, policy: str = "discard", max_rounds: int = 400):
        self.hardware = hardware
        self.tries = tries
        self.seed = seed
        self.chain_strength = chain_strength
        self.policy = policy
        self.max_rounds = max_rounds

    def fit(self, X, y=None):
        if self.hardware is None:
            raise ContractError("MinorEmbedder needs a hardware graph")
        self.embedding_ = find_embedding(X, self.hardware, self.tries, self.seed, self.max_rounds)
        return self

    def _check_fitted(self):
        if not hasattr(self, "embedding_"):
            raise ContractError("call fit before transform")

    def transform(self, X) -> EmbeddedProblem:
        self._check_fitted()
        self.embedded_ = embed_problem(X, self.embedding_, self.chain_strength, self.hardware)
        return self.embedded_

    def fit_transform(self, X, y=None, **kw) -> EmbeddedProblem:
        return self.fit(X).transform(X)

    def inverse_transform(self, samples, embedded: EmbeddedProblem | None = None) -> UnembedResult:
        ep = embedded if embedded is not None else getattr(self, "embedded_", None)
        if ep is None:
            raise ContractError("no embedded problem to unembed against")
        return unembed(samples, ep, self.policy, self.seed)
