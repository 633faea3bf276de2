"""Exhaustive ground-state search with blocked matrix products."""

from __future__ import annotations

import numpy as np

from .ising import IsingModel, QuboModel
from .validation import ContractError

MAX_EXACT_VARS = 25
_LOW_BITS = 13
_CHUNK = 256


def _patterns(n: int, lo: int, hi: int) -> np.ndarray:
    """All 2**n patterns, first column slowest, as float rows."""
    if n == 0:
        return np.zeros((1, 0))
    idx = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n - 1, -1, -1)) & 1
    return np.where(bits == 1, hi, lo).astype(float)


def _block_energies(s: np.ndarray, lin: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return s @ lin + np.einsum("ij,jk,ik->i", s, upper, s)


def ground_states(model: QuboModel | IsingModel, tol: float = 1e-9, max_states: int = 100_000):
    """Return ``(energy, states)`` where ``states`` holds every minimiser.

    Energies within ``tol`` of the minimum count as degenerate. Enumeration
    splits variables into a leading block and a trailing block so memory stays
    bounded at 25 variables.
    """
    n = model.size
    if n > MAX_EXACT_VARS:
        raise ContractError(f"{n} variables exceed the exhaustive limit of {MAX_EXACT_VARS}")
    lo, hi = model._alphabet
    lin, rows, cols, vals = model.to_arrays()
    upper = np.zeros((n, n))
    np.add.at(upper, (rows, cols), vals)
    nl = min(n, _LOW_BITS)
    nh = n - nl
    low = _patterns(nl, lo, hi)
    e_low = _block_energies(low, lin[nh:], upper[nh:, nh:])
    cross = upper[:nh, nh:]
    best = np.inf
    found: list[np.ndarray] = []
    for start in range(0, 2**nh, _CHUNK):
        stop = min(2**nh, start + _CHUNK)
        idx = np.arange(start, stop, dtype=np.int64)[:, None]
        bits = (idx >> np.arange(nh - 1, -1, -1)) & 1 if nh else np.zeros((stop - start, 0), dtype=np.int64)
        high = np.where(bits == 1, hi, lo).astype(float)
        e_high = _block_energies(high, lin[:nh], upper[:nh, :nh])
        total = e_high[:, None] + e_low[None, :] + (high @ cross) @ low.T
        m = total.min()
        if m < best - tol:
            best = m
            found = []
        if m <= best + tol:
            hi_idx, lo_idx = np.nonzero(total <= best + tol)
            if len(found) + len(hi_idx) > max_states:
                raise ContractError("ground-state degeneracy exceeds max_states")
            found.append(np.hstack([high[hi_idx], low[lo_idx]]))
    states = np.vstack(found).astype(np.int8) if found else np.zeros((0, n), dtype=np.int8)
    return float(best + model.offset), states
