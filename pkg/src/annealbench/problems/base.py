"""Variable registry, penalty-group bookkeeping and the problem container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Mapping

import numpy as np

from ..ising import QuboModel
from ..validation import ContractError, check_precision

ZERO_TOL = 1e-9


class VariableRegistry:
    """Bijective map between structured labels such as ``("x", p, v)`` and dense indices."""

    def __init__(self, labels=()):
        self._labels: list[tuple] = []
        self._index: dict[tuple, int] = {}
        for label in labels:
            self.add(label)

    def add(self, label) -> int:
        label = tuple(label)
        if label in self._index:
            raise ContractError(f"duplicate variable label {label}")
        self._index[label] = len(self._labels)
        self._labels.append(label)
        return self._index[label]

    def index(self, label) -> int:
        return self._index[tuple(label)]

    def get(self, label, default=None):
        return self._index.get(tuple(label), default)

    def __contains__(self, label) -> bool:
        return tuple(label) in self._index

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self):
        return iter(self._labels)

    def label(self, index: int) -> tuple:
        return self._labels[index]

    def labels(self, kind: str | None = None) -> list[tuple]:
        if kind is None:
            return list(self._labels)
        return [lab for lab in self._labels if lab[0] == kind]

    def count(self, kind: str) -> int:
        return sum(1 for lab in self._labels if lab[0] == kind)

    def to_list(self) -> list[list]:
        return [list(lab) for lab in self._labels]


class QuboBuilder:
    """Accumulates an objective and named penalty groups, each split by constraint key."""

    def __init__(self):
        self.registry = VariableRegistry()
        self._objective: tuple[dict, dict, list] = ({}, {}, [0.0])
        self._groups: dict[str, dict[Hashable, tuple[dict, dict, list]]] = {}

    def var(self, *label) -> int:
        return self.registry.add(label)

    def _slot(self, group, key):
        if group is None:
            return self._objective
        terms = self._groups.setdefault(group, {})
        return terms.setdefault(key, ({}, {}, [0.0]))

    def add_linear(self, i, coef, group=None, key=None):
        lin, _, _ = self._slot(group, key)
        lin[i] = lin.get(i, 0.0) + coef

    def add_quadratic(self, i, j, coef, group=None, key=None):
        if i == j:
            self.add_linear(i, coef, group, key)
            return
        _, quad, _ = self._slot(group, key)
        pair = (i, j) if i < j else (j, i)
        quad[pair] = quad.get(pair, 0.0) + coef

    def add_offset(self, value, group=None, key=None):
        self._slot(group, key)[2][0] += value

    def add_squared(self, coeffs: Mapping[int, float], const: float, group, key):
        """Add ``(sum_i a_i x_i + const) ** 2`` expanded with ``x_i ** 2 = x_i``."""
        items = list(coeffs.items())
        slot = self._slot(group, key)
        slot[2][0] += const * const
        for idx, (i, a) in enumerate(items):
            self.add_linear(i, a * a + 2 * a * const, group, key)
            for j, b in items[idx + 1:]:
                self.add_quadratic(i, j, 2 * a * b, group, key)

    def group_names(self) -> list[str]:
        return list(self._groups)

    def _model(self, slot) -> QuboModel:
        lin, quad, off = slot
        return QuboModel.from_terms(len(self.registry), lin, quad, off[0])

    def finish(self, weights: Mapping[str, float], groups=()):
        """Return ``(qubo, objective, penalties, penalty_terms)``."""
        n = len(self.registry)
        names = list(groups) or list(self._groups)
        objective = self._model(self._objective)
        terms = {g: {k: self._model(s) for k, s in self._groups.get(g, {}).items()} for g in names}
        penalties = {g: _sum_models(n, terms[g].values()) for g in names}
        total = _sum_models(n, [objective] + [_scale(penalties[g], weights[g]) for g in names])
        return total, objective, penalties, terms


def _scale(model: QuboModel, w: float) -> QuboModel:
    return QuboModel(model.n_vars, {i: w * v for i, v in model.linear.items()},
                     {k: w * v for k, v in model.quadratic.items()}, w * model.offset)


def _sum_models(n, models) -> QuboModel:
    lin: dict = {}
    quad: dict = {}
    off = 0.0
    for m in models:
        for i, v in m.linear.items():
            lin[i] = lin.get(i, 0.0) + v
        for k, v in m.quadratic.items():
            quad[k] = quad.get(k, 0.0) + v
        off += m.offset
    return QuboModel.from_terms(n, lin, quad, off)


def _key_to_json(key):
    if isinstance(key, tuple):
        return [_key_to_json(k) for k in key]
    return key


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A QUBO together with its variable labels, penalty structure and oracle optimum.

    ``optimum`` is the objective value of the best feasible solution as computed
    by the class oracle (``None`` until an oracle has been run).
    """

    problem_class: str
    instance: Any
    qubo: QuboModel
    registry: VariableRegistry
    objective: QuboModel
    penalties: Mapping[str, QuboModel]
    penalty_terms: Mapping[str, Mapping[Hashable, QuboModel]]
    penalty_weights: Mapping[str, float]
    optimum: float | None = None
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.registry) != self.qubo.n_vars:
            raise ContractError("registry does not cover every QUBO variable")
        check_precision(self.qubo, stacklevel=3)

    @property
    def n_vars(self) -> int:
        return self.qubo.n_vars

    @property
    def name(self) -> str:
        return str(self.metadata.get("name", self.problem_class))

    def with_optimum(self, optimum: float | None) -> "ProblemInstance":
        return ProblemInstance(self.problem_class, self.instance, self.qubo, self.registry,
                               self.objective, self.penalties, self.penalty_terms,
                               self.penalty_weights, optimum, dict(self.metadata))

    def penalty_energies(self, x) -> dict[str, float]:
        """Unweighted energy of each penalty group for one binary assignment."""
        return {g: m.energy(x) for g, m in self.penalties.items()}

    def objective_value(self, x) -> float:
        return self.objective.energy(x)

    def is_feasible(self, x, tol: float = ZERO_TOL) -> bool:
        return all(abs(e) <= tol for e in self.penalty_energies(x).values())

    def violation_report(self, x, tol: float = ZERO_TOL) -> dict:
        """Structured, JSON-ready list of nonzero penalty terms."""
        x = np.asarray(x)
        report: dict[str, list] = {}
        for g, terms in self.penalty_terms.items():
            bad = []
            for key, model in terms.items():
                e = model.energy(x)
                if abs(e) > tol:
                    bad.append({"key": _key_to_json(key), "energy": e})
            if bad:
                report[g] = bad
        return {"feasible": not report, "violations": report}

    def success_mask(self, X, tol: float = ZERO_TOL) -> np.ndarray:
        """Rows that are feasible and reach the oracle optimum."""
        if self.optimum is None:
            raise ContractError("problem has no oracle optimum; success is undefined")
        X = np.atleast_2d(X)
        ok = np.ones(X.shape[0], dtype=bool)
        for model in self.penalties.values():
            ok &= np.abs(model.energies(X)) <= tol
        ok &= np.abs(self.objective.energies(X) - self.optimum) <= tol * max(1.0, abs(self.optimum))
        return ok

    def to_dict(self) -> dict:
        from .io import instance_to_dict

        return {
            "class": self.problem_class,
            "name": self.name,
            "instance": instance_to_dict(self.instance),
            "qubo": self.qubo.to_dict(),
            "labels": self.registry.to_list(),
            "penalty_weights": dict(self.penalty_weights),
            "optimum": self.optimum,
            "metadata": {k: v for k, v in self.metadata.items() if k != "name"},
        }
