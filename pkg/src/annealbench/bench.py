"""Gauge-averaged success counting, time-to-solution, bootstrap statistics and sweeps."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from sklearn.base import BaseEstimator, clone

from .embedding import (EmbeddedProblem, Embedding, diagnostics, embed_problem, find_embedding,
                        unembed)
from .exact import ground_states
from .ising import apply_gauge, effective_gauge, spins_to_bits
from .problems.base import ProblemInstance
from .problems.io import attach_oracle, instance_to_dict, load_problem, problem_from_dict
from .solvers import SampleSet, SimulatedAnnealingSampler, SVMCSampler
from .topology import HardwareGraph, build_hardware
from .validation import ContractError, check_probability, check_seed

TARGET_PROBABILITY = 0.99
DEFAULT_GAUGES = 100
DEFAULT_READS = 500
DEFAULT_RESAMPLES = 10**5
DEFAULT_BAND = (35.0, 65.0)
PARTIAL_GAUGE_THRESHOLD = 1.0
WORKERS_ENV = "ANNEALBENCH_WORKERS"
AXES = ("chain_strength", "anneal_time", "pause_location", "pause_duration")


def time_to_solution(p_success: float, t_tot: float, target: float = TARGET_PROBABILITY) -> float:
    """Expected time to reach the optimum with probability ``target``.

    ``T_S = t_tot * log(1 - target) / log(1 - p)``, infinite at ``p = 0`` and never
    below a single anneal ``t_tot``.
    """
    p = check_probability(p_success)
    if t_tot <= 0:
        raise ContractError("t_tot must be positive")
    if p == 0.0:
        return math.inf
    if p >= target:
        return float(t_tot)
    return float(t_tot * math.log(1.0 - target) / math.log1p(-p))


@dataclass(frozen=True)
class BootstrapResult:
    median: float
    lo: float
    hi: float
    resamples: int
    percentiles: tuple[float, float]


def bootstrap_median(values, resamples: int = DEFAULT_RESAMPLES,
                     percentiles: tuple[float, float] = DEFAULT_BAND, seed=None,
                     chunk: int = 10_000) -> BootstrapResult:
    """Median of resampled medians with a percentile band; ``inf`` entries stay ``inf``."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ContractError("bootstrap needs at least one value")
    if resamples < 1:
        raise ContractError("resamples must be >= 1")
    if np.isnan(x).any():
        raise ContractError("NaN values are not allowed")
    rng = np.random.default_rng(check_seed(seed))
    medians = np.empty(resamples)
    for start in range(0, resamples, chunk):
        stop = min(resamples, start + chunk)
        idx = rng.integers(0, x.size, size=(stop - start, x.size))
        medians[start:stop] = _median_rows(x[idx])
    lo, hi = np.percentile(medians, list(percentiles), method="inverted_cdf")
    return BootstrapResult(float(_median_rows(medians[None, :])[0]), float(lo), float(hi),
                           int(resamples), tuple(float(p) for p in percentiles))


def _median_rows(a: np.ndarray) -> np.ndarray:
    """Row medians that treat ``inf`` as an ordinary largest value."""
    s = np.sort(a, axis=1)
    n = s.shape[1]
    lo, hi = s[:, (n - 1) // 2], s[:, n // 2]
    with np.errstate(invalid="ignore"):
        out = np.where(lo == hi, lo, 0.5 * (lo + hi))
    return out


@dataclass
class PointResult:
    p_success: float
    broken_fraction: float
    successes: int
    total: int
    t_tot: float
    T_S: float

    def to_dict(self) -> dict:
        return asdict(self)


def gauge_seed(master, *keys: int) -> np.random.SeedSequence:
    """Stream for ``(master seed, instance id, point id, gauge id)``-style keys."""
    root = check_seed(master)
    return np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + tuple(int(k) for k in keys))


def run_point(pi: ProblemInstance, ep: EmbeddedProblem, sampler, gauges: int = DEFAULT_GAUGES,
              reads: int = DEFAULT_READS, seed=None, policy: str = "discard",
              partial_threshold: float = PARTIAL_GAUGE_THRESHOLD) -> PointResult:
    """Success probability and broken fraction over ``gauges x reads`` anneals.

    Each gauge draws a uniform sign vector; when ``|J_F|`` exceeds the partial
    threshold, couplings stronger than it are left ungauged. Reads are mapped
    back through the gauge, unembedded, and counted as successes only when every
    penalty group is zero and the objective equals the oracle optimum.
    """
    if pi.optimum is None:
        raise ContractError("problem has no oracle optimum; success is undefined")
    if gauges < 1 or reads < 1:
        raise ContractError("gauges and reads must be positive")
    thr = partial_threshold if ep.chain_strength > partial_threshold else None
    successes = 0
    broken = 0
    n = len(ep.qubits)
    for k in range(gauges):
        ss = gauge_seed(seed, k)
        sign_seed, solve_seed, tie_seed = ss.spawn(3)
        g = np.random.default_rng(sign_seed).choice(np.array([-1, 1], dtype=np.int8), size=n)
        g_eff = effective_gauge(ep.ising, g, thr)
        gauged = apply_gauge(ep.ising, g, thr)
        result: SampleSet = sampler.sample(gauged, reads, seed=solve_seed)
        physical = result.samples * g_eff[None, :]
        un = unembed(physical, ep, policy, seed=tie_seed)
        broken += int(un.broken.sum())
        if len(un.samples):
            successes += int(pi.success_mask(spins_to_bits(un.samples)).sum())
    total = gauges * reads
    p = successes / total
    t_tot = float(sampler.t_tot())
    return PointResult(p, broken / total, successes, total, t_tot, time_to_solution(p, t_tot))


class PlantedSampler(BaseEstimator):
    """Test double: returns the exact ground state with a planted probability, else breaks it.

    The success probability is a Gaussian bump in ``(chain_strength, pause_location)``.
    Failed reads flip one spin chosen so the energy rises above the ground state.
    """

    def __init__(self, chain_strength: float = 1.0, pause_location=None, anneal_time: float = 1.0,
                 pause_duration: float = 0.0, peak_chain: float = 0.8, peak_pause: float = 0.4,
                 width_chain: float = 0.3, width_pause: float = 0.1, p_max: float = 0.6):
        self.chain_strength = chain_strength
        self.pause_location = pause_location
        self.anneal_time = anneal_time
        self.pause_duration = pause_duration
        self.peak_chain = peak_chain
        self.peak_pause = peak_pause
        self.width_chain = width_chain
        self.width_pause = width_pause
        self.p_max = p_max

    def planted_probability(self) -> float:
        z = ((self.chain_strength - self.peak_chain) / self.width_chain) ** 2
        if self.pause_location is not None:
            z += ((self.pause_location - self.peak_pause) / self.width_pause) ** 2
        return float(self.p_max * math.exp(-z))

    def t_tot(self) -> float:
        return float(self.anneal_time) + (float(self.pause_duration) if self.pause_location is not None else 0.0)

    def sample(self, model, num_reads: int = 100, seed=None) -> SampleSet:
        e0, states = ground_states(model)
        gs = states[0]
        rng = np.random.default_rng(check_seed(seed))
        worse = None
        for i in range(model.n_spins):
            flipped = gs.copy()
            flipped[i] = -flipped[i]
            if model.energy(flipped) > e0 + 1e-9:
                worse = flipped
                break
        hit = rng.random(num_reads) < self.planted_probability()
        out = np.where(hit[:, None], gs[None, :], (worse if worse is not None else gs)[None, :])
        return SampleSet(out, model.energies(out), {"solver": "planted"})


SOLVERS = {"svmc": SVMCSampler, "sa": SimulatedAnnealingSampler, "planted": PlantedSampler}


def make_sampler(name: str, params: dict | None = None):
    if name not in SOLVERS:
        raise ContractError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}")
    return SOLVERS[name](**(params or {}))


def configure(sampler, point: dict):
    """Clone ``sampler`` with the grid-point values it declares as parameters."""
    accepted = sampler.get_params(deep=False)
    return clone(sampler).set_params(**{k: v for k, v in point.items() if k in accepted})


@dataclass
class SweepConfig:
    instances: list[str]
    solver: str = "svmc"
    solver_params: dict = field(default_factory=dict)
    chain_strength: list[float] = field(default_factory=lambda: [0.5, 0.75, 1.0, 1.25, 1.5])
    anneal_time: list[float] = field(default_factory=lambda: [1.0])
    pause_location: list[float | None] = field(default_factory=lambda: [None])
    pause_duration: list[float] = field(default_factory=lambda: [0.0])
    gauges: int = DEFAULT_GAUGES
    reads: int = DEFAULT_READS
    policy: str = "discard"
    resamples: int = DEFAULT_RESAMPLES
    percentiles: tuple[float, float] = DEFAULT_BAND
    seed: int = 0
    hardware: dict = field(default_factory=lambda: {"family": "pegasus", "m": 6})
    embedding_tries: int = 10
    partial_threshold: float = PARTIAL_GAUGE_THRESHOLD

    def __post_init__(self):
        for axis in AXES:
            if not getattr(self, axis):
                raise ContractError(f"grid {axis!r} is empty")
        if self.gauges * self.reads <= 0:
            raise ContractError("gauges x reads must be positive")
        if not self.instances:
            raise ContractError("no instances listed")
        self.percentiles = tuple(self.percentiles)

    @classmethod
    def recommended(cls, instances, **overrides) -> "SweepConfig":
        """Defaults from the pausing guidance: 1 us anneal, 0.2 us pause, s_p over 0.3..0.5."""
        base = dict(instances=list(instances), anneal_time=[1.0], pause_duration=[0.2],
                    pause_location=[0.3, 0.35, 0.4, 0.45, 0.5], chain_strength=[1.0])
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["percentiles"] = list(self.percentiles)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        return cls(**data)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        path = Path(path)
        data = json.loads(path.read_text())
        data["instances"] = [str((path.parent / p).resolve()) if not Path(p).is_absolute() else p
                             for p in data["instances"]]
        return cls.from_dict(data)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def points(self) -> list[dict]:
        return [dict(zip(AXES, combo)) for combo in
                itertools.product(*(getattr(self, a) for a in AXES))]


def _stable_id(obj) -> int:
    return zlib.crc32(json.dumps(obj, sort_keys=True, default=str).encode())


def _point_key(point: dict) -> tuple:
    return tuple(-1.0 if point[a] is None else float(point[a]) for a in AXES)


@dataclass
class RunResult:
    rows: list[dict]
    summary: list[dict]
    best: dict | None
    errors: list[dict]
    config: dict
    config_hash: str

    def axes_varied(self) -> list[str]:
        return [a for a in AXES if len(self.config[a]) > 1]


def _load(item) -> ProblemInstance:
    pi = item if isinstance(item, ProblemInstance) else load_problem(item)
    return pi if pi.optimum is not None else attach_oracle(pi)


def _task(args):
    pi, emb, hw_dict, sampler, point, cfg_small, inst_id = args
    if isinstance(pi, dict):
        pi, emb = problem_from_dict(pi), Embedding.from_dict(emb)
    hw = HardwareGraph.from_dict(hw_dict)
    ep = embed_problem(pi, emb, point["chain_strength"], hw)
    s = configure(sampler, point)
    res = run_point(pi, ep, s, cfg_small["gauges"], cfg_small["reads"],
                    gauge_seed(cfg_small["seed"], inst_id, _stable_id(point)), cfg_small["policy"],
                    cfg_small["partial_threshold"])
    diag = diagnostics(ep)
    return res, diag


def workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ContractError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc


def sweep(cfg: SweepConfig, problems: Sequence[ProblemInstance | str] | None = None, sampler=None,
          workers: int | None = None) -> RunResult:
    """Run every grid point on every instance and aggregate T_S per point.

    Per-instance failures (load, oracle, embedding) are recorded and skipped.
    The best point minimises the bootstrap median T_S; ties go to the lower
    ``t_tot`` and then the lower ``|J_F|``.
    """
    sampler = sampler if sampler is not None else make_sampler(cfg.solver, cfg.solver_params)
    hw = build_hardware(cfg.hardware["family"], int(cfg.hardware["m"]), cfg.hardware.get("dead", ()))
    hw_dict = hw.to_dict()
    items = list(problems) if problems is not None else list(cfg.instances)
    errors: list[dict] = []
    loaded = []
    for item in items:
        label = item.name if isinstance(item, ProblemInstance) else str(item)
        try:
            pi = _load(item)
            inst_id = _stable_id(instance_to_dict(pi.instance))
            emb = find_embedding(pi, hw, cfg.embedding_tries, gauge_seed(cfg.seed, inst_id))
            loaded.append((pi, emb, inst_id))
        except Exception as exc:  # noqa: BLE001 - recorded and skipped by design
            errors.append({"instance": label, "stage": "prepare", "error": repr(exc)})
    loaded.sort(key=lambda t: t[2])
    small = {"gauges": cfg.gauges, "reads": cfg.reads, "seed": cfg.seed, "policy": cfg.policy,
             "partial_threshold": cfg.partial_threshold}
    points = sorted(cfg.points(), key=_point_key)
    tasks = [(pi, emb, hw_dict, sampler, point, small, inst_id)
             for point in points for pi, emb, inst_id in loaded]
    n_workers = workers if workers is not None else workers_from_env()
    if n_workers > 1 and len(tasks) > 1:
        # model objects hold read-only views, so workers get serialized records
        wire = [(t[0].to_dict(), t[1].to_dict(), *t[2:]) for t in tasks]
        with ProcessPoolExecutor(max_workers=n_workers) as ex:
            outcomes = list(ex.map(_safe_task, wire))
    else:
        outcomes = [_safe_task(t) for t in tasks]
    rows = []
    for (pi, emb, _, _, point, _, inst_id), out in zip(tasks, outcomes):
        if isinstance(out, Exception):
            errors.append({"instance": pi.name, "stage": "run", "point": point, "error": repr(out)})
            continue
        res, diag = out
        rows.append({"instance": pi.name, "instance_id": inst_id, **point, **res.to_dict(),
                     "physical_qubits": diag.physical_qubits, "chain_max": diag.chain_max,
                     "R_J": diag.R_J, "R_h": diag.R_h})
    if not rows:
        raise ContractError(f"every instance failed: {errors}")
    summary = []
    for point in points:
        ts = [r["T_S"] for r in rows if all(r[a] == point[a] for a in AXES)]
        if not ts:
            continue
        t_tot = next(r["t_tot"] for r in rows if all(r[a] == point[a] for a in AXES))
        b = bootstrap_median(ts, cfg.resamples, cfg.percentiles, gauge_seed(cfg.seed, _stable_id(point)))
        summary.append({**point, "t_tot": t_tot, "median_T_S": b.median, "lo": b.lo, "hi": b.hi,
                        "n_instances": len(ts)})
    best = min(summary, key=lambda s: (s["median_T_S"], s["t_tot"], s["chain_strength"]))
    return RunResult(rows, summary, best, errors, cfg.to_dict(), cfg.config_hash())


def _safe_task(args):
    try:
        return _task(args)
    except Exception as exc:  # noqa: BLE001 - surfaced as a recorded error
        return exc


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def results_csv(result: RunResult) -> str:
    cols = ["instance", "instance_id", *AXES, "p_success", "broken_fraction", "successes", "total",
            "t_tot", "T_S", "physical_qubits", "chain_max", "R_J", "R_h"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in sorted(result.rows, key=lambda r: (_point_key(r), r["instance_id"])):
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def plot_data(result: RunResult, axis: str) -> str:
    """``x, median, lo, hi`` along ``axis`` with the other axes held at the best point."""
    fixed = {a: result.best[a] for a in AXES if a != axis}
    rows = [s for s in result.summary if all(s[a] == fixed[a] for a in fixed)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([axis, "median", "lo", "hi"])
    for s in sorted(rows, key=lambda s: -1.0 if s[axis] is None else s[axis]):
        w.writerow([_fmt(s[axis]), _fmt(s["median_T_S"]), _fmt(s["lo"]), _fmt(s["hi"])])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def summary_json(result: RunResult) -> str:
    data = {"config_hash": result.config_hash, "config": result.config, "best": result.best,
            "summary": result.summary, "errors": result.errors, "seed": result.config["seed"]}
    return json.dumps(_json_safe(data), indent=1, sort_keys=True)


def emit_report(result: RunResult | None, out_dir) -> list[Path]:
    """Write ``results.csv``, ``summary.json`` and ``plot_<axis>.csv`` per varied axis."""
    if result is None or not result.rows:
        raise ContractError("no results to report")
    contents = {"results.csv": results_csv(result), "summary.json": summary_json(result)}
    axes = result.axes_varied() or ["chain_strength"]
    for axis in axes:
        contents[f"plot_{axis}.csv"] = plot_data(result, axis)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in contents.items():
        p = out / name
        p.write_text(text)
        written.append(p)
    return written


def run_directory(root, cfg: SweepConfig) -> Path:
    return Path(root) / cfg.config_hash()
