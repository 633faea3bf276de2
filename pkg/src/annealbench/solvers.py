"""Exact, simulated-annealing and spin-vector Monte Carlo samplers plus control-error noise."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numba
import numpy as np
from sklearn.base import BaseEstimator

from .exact import MAX_EXACT_VARS, ground_states
from .ising import IsingModel, QuboModel, qubo_to_ising
from .schedule import AnnealFunctions, Schedule, anneal_functions, build_schedule
from .validation import ContractError, check_positive, check_seed


@dataclass
class SampleSet:
    """Reads in canonical read-index order with their energies."""

    samples: np.ndarray
    energies: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.int8))
        self.energies = np.asarray(self.energies, dtype=float)
        if self.samples.shape[0] != self.energies.shape[0]:
            raise ContractError("one energy per sample required")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def n_vars(self) -> int:
        return self.samples.shape[1]

    def aggregate(self) -> list[tuple[tuple[int, ...], float, int]]:
        """Distinct ``(assignment, energy, multiplicity)`` records, lowest energy first."""
        if len(self) == 0:
            return []
        uniq, first, counts = np.unique(self.samples, axis=0, return_index=True, return_counts=True)
        recs = [(tuple(int(v) for v in u), float(self.energies[i]), int(c))
                for u, i, c in zip(uniq, first, counts)]
        return sorted(recs, key=lambda r: (r[1], r[0]))

    def lowest(self) -> tuple[np.ndarray, float]:
        i = int(np.argmin(self.energies))
        return self.samples[i], float(self.energies[i])

    def check(self, model, tol: float = 1e-9) -> bool:
        """Stored energies agree with re-evaluation against ``model``."""
        return bool(np.all(np.abs(model.energies(self.samples) - self.energies) <= tol))

    def to_dict(self) -> dict:
        return {"records": [{"sample": list(s), "energy": e, "num_occurrences": c}
                            for s, e, c in self.aggregate()],
                "metadata": _jsonable(self.metadata)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data) -> "SampleSet":
        rows, energies = [], []
        for rec in data["records"]:
            rows.extend([rec["sample"]] * rec["num_occurrences"])
            energies.extend([rec["energy"]] * rec["num_occurrences"])
        return cls(np.array(rows, dtype=np.int8).reshape(len(rows), -1), np.array(energies),
                   dict(data.get("metadata", {})))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _as_ising(model) -> IsingModel:
    if isinstance(model, QuboModel):
        return qubo_to_ising(model)
    if isinstance(model, IsingModel):
        return model
    raise ContractError(f"expected an Ising or QUBO model, got {type(model).__name__}")


def _csr(m: IsingModel):
    """Symmetric adjacency of ``m`` as ``(h, indptr, indices, values)``."""
    n = m.n_spins
    lin, rows, cols, vals = m.to_arrays()
    r = np.concatenate([rows, cols])
    c = np.concatenate([cols, rows])
    v = np.concatenate([vals, vals])
    order = np.lexsort((c, r))
    r, c, v = r[order], c[order], v[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, r + 1, 1)
    return lin.astype(np.float64), np.cumsum(indptr), c.astype(np.int64), v.astype(np.float64)


def read_seeds(seed, num_reads: int, offset: int = 0) -> np.ndarray:
    """One 32-bit seed per read index, derived from ``(seed, read index)``."""
    root = check_seed(seed)
    return np.array([np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (offset + r,))
                     .generate_state(1)[0] for r in range(num_reads)], dtype=np.int64)


@dataclass(frozen=True)
class GroundStates:
    energy: float
    states: np.ndarray


def brute_force(m) -> GroundStates:
    """Every ground state of an Ising (or QUBO) model with at most 25 variables."""
    if m.size > MAX_EXACT_VARS:
        raise ContractError(f"{m.size} variables exceed the exhaustive limit of {MAX_EXACT_VARS}")
    e, states = ground_states(m)
    return GroundStates(e, states)


@numba.njit(cache=True)
def _sa_kernel(h, indptr, indices, data, betas, seeds):
    n = h.shape[0]
    reads = seeds.shape[0]
    out = np.empty((reads, n), dtype=np.int8)
    s = np.empty(n, dtype=np.int8)
    for r in range(reads):
        np.random.seed(seeds[r])
        for i in range(n):
            s[i] = 1 if np.random.random() < 0.5 else -1
        for b in range(betas.shape[0]):
            beta = betas[b]
            for _ in range(n):
                # random site order; a fixed order drifts zero-cost domain walls in lockstep
                i = np.random.randint(0, n)
                f = h[i]
                for k in range(indptr[i], indptr[i + 1]):
                    f += data[k] * s[indices[k]]
                de = -2.0 * s[i] * f
                if de <= 0.0 or np.random.random() < math.exp(-beta * de):
                    s[i] = -s[i]
        out[r] = s
    return out


def default_beta_range(m: IsingModel) -> tuple[float, float]:
    """Hot end accepts the largest flip half the time; cold end accepts the smallest 1% of the time."""
    lin, rows, cols, vals = m.to_arrays()
    local = np.abs(lin).copy()
    np.add.at(local, rows, np.abs(vals))
    np.add.at(local, cols, np.abs(vals))
    coefs = np.abs(m.coefficients())
    coefs = coefs[coefs > 0]
    if coefs.size == 0:
        return 0.1, 1.0
    hot = math.log(2) / (2 * float(local.max()))
    cold = math.log(100) / (2 * float(coefs.min()))
    return hot, max(cold, hot)


def simulated_anneal(m, sweeps: int = 1000, beta_range: tuple[float, float] | None = None,
                     num_reads: int = 100, seed=None) -> SampleSet:
    """Single-spin Metropolis, one sweep (n random-site updates) per rung of a geometric beta ladder."""
    m = _as_ising(m)
    if sweeps < 1:
        raise ContractError("sweeps must be positive")
    b0, b1 = beta_range if beta_range is not None else default_beta_range(m)
    betas = np.geomspace(b0, b1, sweeps)
    h, indptr, indices, data = _csr(m)
    samples = _sa_kernel(h, indptr, indices, data, betas, read_seeds(seed, num_reads))
    return SampleSet(samples, m.energies(samples) if num_reads else np.zeros(0),
                     {"solver": "simulated_anneal", "seed": _seed_repr(seed), "sweeps": sweeps,
                      "beta_range": [b0, b1]})


def _seed_repr(seed):
    if isinstance(seed, np.random.SeedSequence):
        return {"entropy": seed.entropy, "spawn_key": list(seed.spawn_key)}
    return seed


@numba.njit(cache=True)
def _svmc_kernel(h, indptr, indices, data, A, B, kT, window_floor, seeds):
    n = h.shape[0]
    reads = seeds.shape[0]
    out = np.empty((reads, n), dtype=np.int8)
    theta = np.empty(n)
    cth = np.empty(n)
    for r in range(reads):
        np.random.seed(seeds[r])
        for i in range(n):
            theta[i] = 0.5 * math.pi
            cth[i] = math.cos(theta[i])
        for t in range(A.shape[0]):
            a = A[t]
            b = B[t]
            width = math.pi * min(1.0, a / (a + b) + window_floor) if a + b > 0 else math.pi
            for i in range(n):
                new = theta[i] + width * (2.0 * np.random.random() - 1.0)
                if new < 0.0:
                    new = -new
                elif new > math.pi:
                    new = 2.0 * math.pi - new
                f = h[i]
                for k in range(indptr[i], indptr[i + 1]):
                    f += data[k] * cth[indices[k]]
                cn = math.cos(new)
                de = -a * (math.sin(new) - math.sin(theta[i])) + b * (cn - cth[i]) * f
                if de <= 0.0 or (kT > 0.0 and np.random.random() < math.exp(-de / kT)):
                    theta[i] = new
                    cth[i] = cn
        for i in range(n):
            out[r, i] = 1 if cth[i] >= 0.0 else -1
    return out


def svmc_profile(schedule: Schedule, functions: AnnealFunctions, sweeps_per_us: float):
    """Per-sweep ``(s, A, B)``; sweep ``k`` samples the schedule at its midpoint."""
    n = int(round(schedule.t_tot * sweeps_per_us))
    t = (np.arange(n) + 0.5) / sweeps_per_us
    s = schedule.s_at(np.minimum(t, schedule.t_tot))
    A, B = functions.at(s)
    return s, np.ascontiguousarray(A), np.ascontiguousarray(B)


def svmc_anneal(m, schedule: Schedule, functions: AnnealFunctions, num_reads: int = 100,
                temperature_mK: float | None = None, sweeps_per_us: float = 1000.0,
                window_floor: float = 0.1, seed=None) -> SampleSet:
    """Spin-vector Monte Carlo driven by ``A(s(t))``, ``B(s(t))`` and the schedule.

    Each spin is a rotor angle in ``[0, pi]`` starting at ``pi / 2`` with energy
    ``-A sum sin(theta) + B (sum h cos(theta) + sum J cos(theta) cos(theta))``.
    Every sweep proposes one uniform move per spin within half-width
    ``pi * min(1, A / (A + B) + window_floor)``, reflected at the interval ends,
    and accepts it with the Metropolis rule at ``k_B T``. Time is discretised at
    ``sweeps_per_us`` sweeps per microsecond, so a pause adds ``t_p`` times that
    many sweeps at fixed ``s``. Reads return ``sign(cos(theta))``.
    """
    m = _as_ising(m)
    check_positive(sweeps_per_us, "sweeps_per_us")
    f = functions if temperature_mK is None else functions.with_temperature(temperature_mK)
    _, A, B = svmc_profile(schedule, f, sweeps_per_us)
    h, indptr, indices, data = _csr(m)
    samples = _svmc_kernel(h, indptr, indices, data, A, B, f.kT, float(window_floor),
                           read_seeds(seed, num_reads))
    return SampleSet(samples, m.energies(samples) if num_reads else np.zeros(0),
                     {"solver": "svmc", "seed": _seed_repr(seed), "sweeps": int(len(A)),
                      "schedule": [list(p) for p in schedule.breakpoints], "t_tot": schedule.t_tot,
                      "temperature_mK": f.temperature_mK, "anneal_functions": f.name})


class SimulatedAnnealingSampler(BaseEstimator):
    """Metropolis annealer; ``anneal_time`` is the modelled wall time used for T_S."""

    def __init__(self, sweeps: int = 1000, beta_range=None, anneal_time: float = 1.0,
                 pause_location=None, pause_duration: float = 0.0, seed=None):
        self.sweeps = sweeps
        self.beta_range = beta_range
        self.anneal_time = anneal_time
        self.pause_location = pause_location
        self.pause_duration = pause_duration
        self.seed = seed

    def t_tot(self) -> float:
        return float(self.anneal_time) + (float(self.pause_duration) if self.pause_location is not None else 0.0)

    def sample(self, model, num_reads: int = 100, seed=None) -> SampleSet:
        return simulated_anneal(model, self.sweeps, self.beta_range, num_reads,
                                self.seed if seed is None else seed)


class SVMCSampler(BaseEstimator):
    """Spin-vector Monte Carlo with a pause-capable schedule."""

    def __init__(self, anneal_time: float = 1.0, pause_location=None, pause_duration: float = 0.0,
                 anneal_functions="dw2k", temperature=None, sweeps_per_us: float = 1000.0,
                 window_floor: float = 0.1, min_anneal: float = 1.0, seed=None):
        self.anneal_time = anneal_time
        self.pause_location = pause_location
        self.pause_duration = pause_duration
        self.anneal_functions = anneal_functions
        self.temperature = temperature
        self.sweeps_per_us = sweeps_per_us
        self.window_floor = window_floor
        self.min_anneal = min_anneal
        self.seed = seed

    def schedule(self) -> Schedule:
        pause = None
        if self.pause_location is not None and self.pause_duration:
            pause = (self.pause_location, self.pause_duration)
        return build_schedule(self.anneal_time, pause, min_anneal=self.min_anneal)

    def functions(self) -> AnnealFunctions:
        f = self.anneal_functions
        return f if isinstance(f, AnnealFunctions) else anneal_functions(f)

    def t_tot(self) -> float:
        return self.schedule().t_tot

    def sample(self, model, num_reads: int = 100, seed=None) -> SampleSet:
        return svmc_anneal(model, self.schedule(), self.functions(), num_reads, self.temperature,
                           self.sweeps_per_us, self.window_floor, self.seed if seed is None else seed)


def ice_perturb(m: IsingModel, sigma_h: float, sigma_J: float, seed=None) -> IsingModel:
    """Copy of ``m`` with independent zero-mean Gaussian noise on every field and coupling."""
    if sigma_h < 0 or sigma_J < 0:
        raise ContractError("noise widths must be non-negative")
    rng = np.random.default_rng(check_seed(seed))
    dh = rng.normal(0.0, sigma_h, size=len(m.h)) if sigma_h > 0 else np.zeros(len(m.h))
    dJ = rng.normal(0.0, sigma_J, size=len(m.J)) if sigma_J > 0 else np.zeros(len(m.J))
    h = {i: v + d for (i, v), d in zip(m.h.items(), dh)}
    J = {k: v + d for (k, v), d in zip(m.J.items(), dJ)}
    return IsingModel(m.n_spins, h, J, m.offset)


def rank_changes(original: IsingModel, perturbed: IsingModel) -> int:
    """Number of coefficient pairs whose strict order flips between the two models."""
    a = np.concatenate([np.fromiter(original.h.values(), float), np.fromiter(original.J.values(), float)])
    b = np.concatenate([np.array([perturbed.h.get(i, 0.0) for i in original.h]),
                        np.array([perturbed.J.get(k, 0.0) for k in original.J])])
    da = np.sign(a[:, None] - a[None, :])
    db = np.sign(b[:, None] - b[None, :])
    flips = (da * db < 0)
    return int(np.triu(flips, 1).sum())
