"""Piecewise-linear anneal schedules, annealing functions and regime diagnostics."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import ContractError

K_B_GHZ_PER_MK = 0.0208366  # Boltzmann constant over Planck, GHz per mK
DEFAULT_MIN_ANNEAL_US = 1.0
DEFAULT_MAX_SLOPE = 1.0  # per microsecond
DEFAULT_MAX_SLOPE_CHANGES = 12
_TOL = 1e-9


@dataclass(frozen=True)
class Schedule:
    """Breakpoints ``(t_us, s)`` of a piecewise-linear anneal fraction."""

    breakpoints: tuple[tuple[float, float], ...]
    max_slope: float = DEFAULT_MAX_SLOPE
    max_slope_changes: int = DEFAULT_MAX_SLOPE_CHANGES

    def __post_init__(self):
        pts = tuple((float(t), float(s)) for t, s in self.breakpoints)
        object.__setattr__(self, "breakpoints", pts)
        problems = self.violations()
        if problems:
            raise ContractError("invalid schedule: " + "; ".join(problems))

    def violations(self) -> list[str]:
        pts = self.breakpoints
        out = []
        if len(pts) < 2:
            return ["need at least two breakpoints"]
        t = np.array([p[0] for p in pts])
        s = np.array([p[1] for p in pts])
        if abs(t[0]) > _TOL or abs(s[0]) > _TOL:
            out.append("schedule must start at (0, 0)")
        if abs(s[-1] - 1.0) > _TOL:
            out.append("schedule must end at s = 1")
        dt = np.diff(t)
        if np.any(dt <= 0):
            out.append("breakpoint times must be strictly increasing")
            return out
        ds = np.diff(s)
        if np.any(ds < -_TOL):
            out.append("s must be non-decreasing")
        slopes = ds / dt
        if np.any(slopes > self.max_slope + _TOL):
            out.append(f"slope {slopes.max():.6g} exceeds {self.max_slope} per us")
        if self.slope_changes(slopes) > self.max_slope_changes:
            out.append(f"more than {self.max_slope_changes} slope changes")
        return out

    @staticmethod
    def slope_changes(slopes) -> int:
        return int(np.sum(np.abs(np.diff(slopes)) > _TOL))

    @property
    def times(self) -> np.ndarray:
        return np.array([p[0] for p in self.breakpoints])

    @property
    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.breakpoints])

    @property
    def t_tot(self) -> float:
        return self.breakpoints[-1][0]

    def pause(self) -> tuple[float, float] | None:
        """``(s_p, t_p)`` of the first flat segment strictly inside (0, 1), if any."""
        pts = self.breakpoints
        for (t0, s0), (t1, s1) in zip(pts, pts[1:]):
            if abs(s1 - s0) <= _TOL and _TOL < s0 < 1 - _TOL:
                return s0, t1 - t0
        return None

    @property
    def s_p(self) -> float | None:
        p = self.pause()
        return None if p is None else p[0]

    @property
    def t_p(self) -> float:
        p = self.pause()
        return 0.0 if p is None else p[1]

    @property
    def t_a(self) -> float:
        return self.t_tot - self.t_p

    def s_at(self, t) -> np.ndarray:
        return np.interp(t, self.times, self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_us", "s"])
        for t, s in self.breakpoints:
            w.writerow([repr(t), repr(s)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, **kw) -> "Schedule":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if rows and rows[0][0].strip() == "t_us":
            rows = rows[1:]
        return cls(tuple((float(t), float(s)) for t, s in rows), **kw)

    def to_dict(self) -> dict:
        return {"breakpoints": [list(p) for p in self.breakpoints], "t_a": self.t_a,
                "s_p": self.s_p, "t_p": self.t_p, "t_tot": self.t_tot}


def build_schedule(t_a: float, pause: tuple[float, float] | None = None,
                   min_anneal: float = DEFAULT_MIN_ANNEAL_US, max_slope: float = DEFAULT_MAX_SLOPE,
                   max_slope_changes: int = DEFAULT_MAX_SLOPE_CHANGES) -> Schedule:
    """Linear ramp over ``t_a`` with an optional hold at ``s_p`` for ``t_p``.

    Both ramps keep the base rate ``1 / t_a`` so ``t_tot = t_a + t_p``.
    """
    if t_a < min_anneal - _TOL:
        raise ContractError(f"anneal time {t_a} us below device minimum {min_anneal} us")
    if 1.0 / t_a > max_slope + _TOL:
        raise ContractError(f"ramp rate {1.0 / t_a:.6g} exceeds {max_slope} per us")
    if pause is None:
        return Schedule(((0.0, 0.0), (t_a, 1.0)), max_slope, max_slope_changes)
    s_p, t_p = float(pause[0]), float(pause[1])
    if not 0.0 < s_p < 1.0:
        raise ContractError("pause location s_p must lie in (0, 1)")
    if t_p < 0:
        raise ContractError("pause duration must be non-negative")
    t1 = t_a * s_p
    if t1 + t_p == t1:
        # zero, or too short to separate two breakpoints in floating point
        return Schedule(((0.0, 0.0), (t_a, 1.0)), max_slope, max_slope_changes)
    pts = ((0.0, 0.0), (t1, s_p), (t1 + t_p, s_p), (t_a + t_p, 1.0))
    return Schedule(pts, max_slope, max_slope_changes)


def load_schedule(path, **kw) -> Schedule:
    return Schedule.from_csv(Path(path).read_text(), **kw)


@dataclass(frozen=True)
class AnnealFunctions:
    """Tabulated driver ``A(s)`` and problem ``B(s)`` energies in GHz plus temperature."""

    s: tuple[float, ...]
    A: tuple[float, ...]
    B: tuple[float, ...]
    temperature_mK: float
    name: str = "custom"
    endpoint_tol: float = 0.02

    def __post_init__(self):
        s, A, B = (np.asarray(v, dtype=float) for v in (self.s, self.A, self.B))
        if not (s.shape == A.shape == B.shape) or s.ndim != 1 or len(s) < 2:
            raise ContractError("s, A and B must be equal-length 1-d tables")
        if np.any(np.diff(s) <= 0) or s[0] < 0 or s[-1] > 1:
            raise ContractError("s samples must be strictly increasing in [0, 1]")
        scale = max(A.max(), B.max(), _TOL)
        if np.any(np.diff(A) > _TOL * scale):
            raise ContractError("A(s) must be non-increasing")
        if np.any(np.diff(B) < -_TOL * scale):
            raise ContractError("B(s) must be non-decreasing")
        if A[-1] > self.endpoint_tol * scale or B[0] > self.endpoint_tol * scale:
            raise ContractError("expected A(1) ~ 0 and B(0) ~ 0")
        if np.any(A < 0) or np.any(B < 0):
            raise ContractError("energies must be non-negative")
        if self.temperature_mK < 0:
            raise ContractError("temperature must be non-negative")
        for name, v in (("s", s), ("A", A), ("B", B)):
            object.__setattr__(self, name, tuple(v.tolist()))

    @property
    def grid(self) -> np.ndarray:
        return np.asarray(self.s)

    @property
    def kT(self) -> float:
        """Thermal energy in GHz."""
        return K_B_GHZ_PER_MK * self.temperature_mK

    def at(self, s) -> tuple[np.ndarray, np.ndarray]:
        return np.interp(s, self.s, self.A), np.interp(s, self.s, self.B)

    def with_temperature(self, temperature_mK: float) -> "AnnealFunctions":
        return AnnealFunctions(self.s, self.A, self.B, temperature_mK, self.name, self.endpoint_tol)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"temperature_mK={self.temperature_mK!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "A_GHz", "B_GHz"])
        for row in zip(self.s, self.A, self.B):
            w.writerow([repr(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, name: str = "custom") -> "AnnealFunctions":
        temperature = None
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("temperature_mK="):
                temperature = float(line.split("=", 1)[1])
            elif line.startswith("s,") or line.startswith("#"):
                continue
            else:
                rows.append([float(v) for v in line.split(",")])
        if temperature is None:
            raise ContractError("missing temperature_mK=<value> header line")
        arr = np.array(rows)
        return cls(tuple(arr[:, 0]), tuple(arr[:, 1]), tuple(arr[:, 2]), temperature, name)


def load_anneal_functions(path) -> AnnealFunctions:
    p = Path(path)
    return AnnealFunctions.from_csv(p.read_text(), name=p.stem)


def synthetic_dw2k(n: int = 201) -> AnnealFunctions:
    """Synthetic 2000Q-like curves: slower driver decay, higher final B. Not device data."""
    s = np.linspace(0, 1, n)
    return AnnealFunctions(tuple(s), tuple(6.0 * (1 - s) ** 2.5), tuple(11.0 * s**1.8), 12.1,
                           "synthetic-dw2k")


def synthetic_dwa(n: int = 201) -> AnnealFunctions:
    """Synthetic Advantage-like curves: faster driver decay, lower final B. Not device data."""
    s = np.linspace(0, 1, n)
    return AnnealFunctions(tuple(s), tuple(6.0 * (1 - s) ** 4), tuple(9.0 * s**1.8), 15.8,
                           "synthetic-dwa")


SYNTHETIC = {"dw2k": synthetic_dw2k, "dwa": synthetic_dwa}


def anneal_functions(source: str) -> AnnealFunctions:
    """Resolve a synthetic profile name or a CSV path."""
    if source in SYNTHETIC:
        return SYNTHETIC[source]()
    return load_anneal_functions(source)


def scales(f: AnnealFunctions) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(s, Q, C)`` with ``Q = A / B`` and ``C = k_B T / B``; ``+inf`` where ``B ~ 0``."""
    s = f.grid
    A, B = np.asarray(f.A), np.asarray(f.B)
    tiny = B <= _TOL * max(B.max(), 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        Q = np.where(tiny, np.inf, A / np.where(tiny, 1.0, B))
        C = np.where(tiny, np.inf, f.kT / np.where(tiny, 1.0, B))
    if f.kT == 0:
        C = np.zeros_like(s)
    return s, Q, C


@dataclass(frozen=True)
class RegimeReport:
    s: np.ndarray
    labels: tuple[str, ...]
    ratio: np.ndarray
    crossings: tuple[float, ...]
    regime_I_end: float | None
    regime_III_start: float | None

    @property
    def s_star(self) -> float | None:
        return self.crossings[0] if self.crossings else None

    def to_dict(self) -> dict:
        return {"crossings": list(self.crossings), "regime_I_end": self.regime_I_end,
                "regime_III_start": self.regime_III_start}


def _interp_crossings(s, f) -> list[float]:
    """Zeros of a sampled function by linear interpolation between sign changes."""
    out = []
    for k in range(len(s) - 1):
        a, b = f[k], f[k + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0:
            out.append(float(s[k]))
        elif a * b < 0:
            out.append(float(s[k] + (s[k + 1] - s[k]) * a / (a - b)))
    if len(f) and f[-1] == 0 and np.isfinite(f[-1]):
        out.append(float(s[-1]))
    return sorted(set(out))


def classify_regimes(s, Q, C, rho: float = 10.0) -> RegimeReport:
    """Label each sample I (Q/C > rho), III (Q/C < 1/rho) or II, and locate Q = C.

    Where both scales diverge (``B ~ 0``) the ratio is taken as ``+inf``. The
    comparison works on ``log(Q/C)`` so crossing points interpolate smoothly.
    """
    if rho <= 1:
        raise ContractError("rho must exceed 1")
    s, Q, C = (np.asarray(v, dtype=float) for v in (s, Q, C))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.isinf(Q) & np.isinf(C), np.inf, Q / C)
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    labels = tuple("I" if r > rho else "III" if r < 1 / rho else "II" for r in ratio)
    with np.errstate(divide="ignore"):
        log_r = np.log(ratio)
    crossings = _interp_crossings(s, log_r)
    if len(crossings) > 1:
        warnings.warn("Q/C is not monotone; reporting every crossing", RuntimeWarning, stacklevel=2)
    ends_I = _interp_crossings(s, log_r - np.log(rho)) if np.isfinite(rho) else []
    starts_III = _interp_crossings(s, log_r + np.log(rho)) if np.isfinite(rho) else []
    return RegimeReport(s, labels, ratio, tuple(crossings),
                        ends_I[0] if ends_I else None, starts_III[0] if starts_III else None)


def regimes(f: AnnealFunctions, rho: float = 10.0) -> RegimeReport:
    return classify_regimes(*scales(f), rho=rho)
