"""Small input-validation helpers shared across the package."""

import numbers

import numpy as np


def ensure_rng(seed):
    """Return a numpy Generator from a seed, SeedSequence, Generator or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise TypeError(f"cannot build a random generator from {seed!r}")


def check_finite_scalar(value, name):
    v = float(value)
    if not np.isfinite(v):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return v


def as_endpoint_array(points):
    """Coerce endpoint-like input to a float array of shape (n, 2)."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) endpoints, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("endpoints must be finite")
    return arr
