"""QUBO and Ising models, energy evaluation, conversion and gauge transforms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .validation import ContractError, check_assignment, check_signs


def _freeze_terms(n, linear, quadratic):
    lin = {}
    for i, v in linear.items():
        i = int(i)
        if not 0 <= i < n:
            raise ContractError(f"linear index {i} outside [0, {n})")
        lin[i] = float(v)
    quad = {}
    for key, v in quadratic.items():
        i, j = (int(k) for k in key)
        if i == j:
            raise ContractError(f"quadratic key ({i}, {j}) is not a pair of distinct indices")
        if i > j:
            raise ContractError(f"quadratic key ({i}, {j}) must be ordered i < j")
        if not (0 <= i < n and 0 <= j < n):
            raise ContractError(f"quadratic key ({i}, {j}) outside [0, {n})")
        quad[(i, j)] = float(v)
    return (MappingProxyType(dict(sorted(lin.items()))),
            MappingProxyType(dict(sorted(quad.items()))))


def _merge_terms(linear, quadratic, square_to_linear):
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    offset = 0.0
    for i, v in linear.items():
        lin[int(i)] = lin.get(int(i), 0.0) + float(v)
    for (i, j), v in quadratic.items():
        i, j = int(i), int(j)
        if i == j:
            # x*x = x for binaries, s*s = 1 for spins
            if square_to_linear:
                lin[i] = lin.get(i, 0.0) + float(v)
            else:
                offset += float(v)
            continue
        key = (i, j) if i < j else (j, i)
        quad[key] = quad.get(key, 0.0) + float(v)
    lin = {k: v for k, v in lin.items() if v != 0.0}
    quad = {k: v for k, v in quad.items() if v != 0.0}
    return lin, quad, offset


class _Model:
    """Shared machinery for the two coefficient-map models."""

    _alphabet: tuple[int, int]

    @property
    def size(self) -> int:
        raise NotImplementedError

    def _terms(self):
        raise NotImplementedError

    def to_arrays(self):
        """Return ``(linear, rows, cols, values)`` as dense numpy arrays."""
        return self._arrays

    @cached_property
    def _arrays(self):
        lin_map, quad_map = self._terms()
        lin = np.zeros(self.size)
        for i, v in lin_map.items():
            lin[i] = v
        if quad_map:
            pairs = np.array(list(quad_map.keys()), dtype=np.int64)
            rows, cols = pairs[:, 0], pairs[:, 1]
            vals = np.fromiter(quad_map.values(), dtype=float, count=len(quad_map))
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0)
        return lin, rows, cols, vals

    def interaction_matrix(self) -> np.ndarray:
        """Symmetric dense matrix holding each pair coefficient on both sides."""
        _, rows, cols, vals = self.to_arrays()
        mat = np.zeros((self.size, self.size))
        mat[rows, cols] = vals
        mat[cols, rows] = vals
        return mat

    def energies(self, samples) -> np.ndarray:
        """Vectorised energy of each row of ``samples``."""
        samples = np.atleast_2d(np.asarray(samples))
        if samples.shape[1] != self.size:
            raise ContractError(
                f"samples have {samples.shape[1]} columns, model has {self.size} variables")
        check_assignment(samples, self._alphabet)
        lin, rows, cols, vals = self.to_arrays()
        s = samples.astype(float)
        out = s @ lin + self.offset
        if len(vals):
            out = out + (s[:, rows] * s[:, cols]) @ vals
        return out

    def energy(self, assignment) -> float:
        a = np.asarray(assignment)
        if a.ndim != 1:
            raise ContractError("a single assignment must be one-dimensional")
        return float(self.energies(a[None, :])[0])

    def coefficients(self) -> np.ndarray:
        lin_map, quad_map = self._terms()
        return np.array(list(lin_map.values()) + list(quad_map.values()), dtype=float)

    def to_dict(self) -> dict:
        lin_map, quad_map = self._terms()
        return {
            "kind": self.kind,
            "n_vars": self.size,
            "linear": [[i, v] for i, v in lin_map.items()],
            "quadratic": [[i, j, v] for (i, j), v in quad_map.items()],
            "offset": self.offset,
        }


@dataclass(frozen=True)
class QuboModel(_Model):
    """Quadratic cost over binary variables ``x in {0, 1}^n``."""

    n_vars: int
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    kind = "qubo"
    _alphabet = (0, 1)

    def __post_init__(self):
        if self.n_vars < 0:
            raise ContractError("n_vars must be non-negative")
        lin, quad = _freeze_terms(self.n_vars, self.linear, self.quadratic)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def size(self) -> int:
        return self.n_vars

    def _terms(self):
        return self.linear, self.quadratic

    @classmethod
    def from_terms(cls, n_vars, linear=None, quadratic=None, offset=0.0) -> "QuboModel":
        """Build from unnormalised terms; merges (j, i) into (i, j) and x_i^2 into x_i."""
        lin, quad, extra = _merge_terms(linear or {}, quadratic or {}, square_to_linear=True)
        return cls(n_vars, lin, quad, offset + extra)

    @classmethod
    def from_dict(cls, data: Mapping) -> "QuboModel":
        return cls.from_terms(
            data["n_vars"],
            {int(i): v for i, v in data["linear"]},
            {(int(i), int(j)): v for i, j, v in data["quadratic"]},
            data.get("offset", 0.0),
        )


@dataclass(frozen=True)
class IsingModel(_Model):
    """Spin model ``offset + sum h_i s_i + sum J_ij s_i s_j`` with ``s in {-1, +1}^n``."""

    n_spins: int
    h: Mapping[int, float] = field(default_factory=dict)
    J: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    kind = "ising"
    _alphabet = (-1, 1)

    def __post_init__(self):
        if self.n_spins < 0:
            raise ContractError("n_spins must be non-negative")
        h, J = _freeze_terms(self.n_spins, self.h, self.J)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def size(self) -> int:
        return self.n_spins

    def _terms(self):
        return self.h, self.J

    @classmethod
    def from_terms(cls, n_spins, h=None, J=None, offset=0.0) -> "IsingModel":
        lin, quad, extra = _merge_terms(h or {}, J or {}, square_to_linear=False)
        return cls(n_spins, lin, quad, offset + extra)

    @classmethod
    def from_dict(cls, data: Mapping) -> "IsingModel":
        return cls.from_terms(
            data["n_vars"],
            {int(i): v for i, v in data["linear"]},
            {(int(i), int(j)): v for i, j, v in data["quadratic"]},
            data.get("offset", 0.0),
        )


def model_from_dict(data: Mapping) -> QuboModel | IsingModel:
    if data.get("kind", "qubo") == "ising":
        return IsingModel.from_dict(data)
    return QuboModel.from_dict(data)


def energy(model: QuboModel | IsingModel, assignment) -> float:
    """Energy of one assignment; ``{0,1}`` values for QUBO, ``{-1,+1}`` for Ising."""
    return model.energy(assignment)


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Substitute ``x = (1 + s) / 2``; energies agree on every assignment."""
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = q.offset
    for i, a in q.linear.items():
        h[i] = h.get(i, 0.0) + a / 2
        offset += a / 2
    for (i, j), b in q.quadratic.items():
        J[(i, j)] = b / 4
        h[i] = h.get(i, 0.0) + b / 4
        h[j] = h.get(j, 0.0) + b / 4
        offset += b / 4
    return IsingModel.from_terms(q.n_vars, h, J, offset)


def ising_to_qubo(m: IsingModel) -> QuboModel:
    """Substitute ``s = 2x - 1``; inverse of :func:`qubo_to_ising`."""
    lin: dict[int, float] = {}
    quad: dict[tuple[int, int], float] = {}
    offset = m.offset
    for i, hi in m.h.items():
        lin[i] = lin.get(i, 0.0) + 2 * hi
        offset -= hi
    for (i, j), Jij in m.J.items():
        quad[(i, j)] = 4 * Jij
        lin[i] = lin.get(i, 0.0) - 2 * Jij
        lin[j] = lin.get(j, 0.0) - 2 * Jij
        offset += Jij
    return QuboModel.from_terms(m.n_spins, lin, quad, offset)


def spins_to_bits(spins) -> np.ndarray:
    return ((np.asarray(spins) + 1) // 2).astype(np.int8)


def bits_to_spins(bits) -> np.ndarray:
    return (2 * np.asarray(bits) - 1).astype(np.int8)


def effective_gauge(m: IsingModel, g: Sequence[int], partial_threshold: float | None = None):
    """Gauge actually applied: endpoints of couplings above the threshold are pinned to +1."""
    g = check_signs(g, m.n_spins)
    if partial_threshold is None:
        return g
    g = g.copy()
    for (i, j), Jij in m.J.items():
        if abs(Jij) > partial_threshold:
            g[i] = 1
            g[j] = 1
    return g


def apply_gauge(m: IsingModel, g: Sequence[int], partial_threshold: float | None = None) -> IsingModel:
    """Spin-reversal transform ``h_i -> g_i h_i``, ``J_ij -> g_i g_j J_ij``.

    With ``partial_threshold`` set, couplings with ``|J_ij|`` above it keep their
    value because their endpoint signs are forced to +1 first. Samples of the
    transformed model map back through ``effective_gauge(...) * sample``.
    """
    g = effective_gauge(m, g, partial_threshold)
    h = {i: g[i] * v for i, v in m.h.items()}
    J = {(i, j): g[i] * g[j] * v for (i, j), v in m.J.items()}
    return IsingModel(m.n_spins, h, J, m.offset)


def enumerate_assignments(n: int, alphabet: tuple[int, int] = (-1, 1)) -> np.ndarray:
    """All ``2**n`` assignments as rows, first variable varying slowest."""
    lo, hi = alphabet
    rows = np.array(list(itertools.product((lo, hi), repeat=n)), dtype=np.int8)
    return rows.reshape(2**n, n)


def precision_ratio(model: QuboModel | IsingModel) -> float:
    """``max|coef| / min|nonzero coef|``; 1.0 for models without coefficients."""
    c = np.abs(model.coefficients())
    c = c[c > 0]
    if c.size == 0:
        return 1.0
    return float(c.max() / c.min())

