"""Input checks shared by the models, builders and samplers."""

from __future__ import annotations

import math
import warnings

import numpy as np


class ContractError(ValueError):
    """An argument violates an operation's precondition."""


class PrecisionWarning(UserWarning):
    """Coefficient dynamic range exceeds what annealer hardware resolves."""


DEFAULT_PRECISION_RATIO = 1e4


def check_assignment(values, alphabet):
    arr = np.asarray(values)
    if arr.size and not np.isin(arr, alphabet).all():
        raise ContractError(f"assignment values must lie in {set(alphabet)}")
    return arr


def check_signs(g, n):
    g = np.asarray(g, dtype=np.int8)
    if g.ndim != 1 or g.shape[0] != n:
        raise ContractError(f"gauge vector must have length {n}")
    check_assignment(g, (-1, 1))
    return g


def check_probability(p, name="p_success"):
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ContractError(f"{name} must lie in [0, 1], got {p}")
    return p


def check_positive(value, name, strict=True):
    value = float(value)
    if math.isnan(value) or value < 0 or (strict and value == 0):
        bound = "> 0" if strict else ">= 0"
        raise ContractError(f"{name} must be {bound}, got {value}")
    return value


def check_precision(model, ratio=DEFAULT_PRECISION_RATIO, stacklevel=2):
    """Warn when the coefficient dynamic range exceeds ``ratio``; returns the range."""
    from .ising import precision_ratio

    r = precision_ratio(model)
    if r > ratio:
        warnings.warn(
            f"coefficient range max/min = {r:.3g} exceeds precision ratio {ratio:g}",
            PrecisionWarning, stacklevel=stacklevel + 1)
    return r


def check_seed(seed):
    """Normalise ``seed`` to a ``SeedSequence``."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
