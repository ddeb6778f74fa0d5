"""Input validation helpers and the package error types."""

import numpy as np

__all__ = [
    "DegeneracyError",
    "NumericalFailureError",
    "SchemaError",
    "as_float_array",
    "as_points",
    "as_vector",
    "check_square_symmetric",
]


class DegeneracyError(ValueError):
    """A spectral quantity requires division by a zero eigenvalue."""


class NumericalFailureError(RuntimeError):
    """A numerical routine failed to produce a usable result."""


class SchemaError(ValueError):
    """A CSV file does not match its documented schema."""


def as_float_array(x, name="array"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


def as_points(X, name="X"):
    """Validate an (n, d) covariate array with n >= 1, d >= 1, finite entries."""
    arr = as_float_array(X, name)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    n, d = arr.shape
    if n < 1 or d < 1:
        raise ValueError(f"{name} must have at least one row and one column, got {arr.shape}")
    return arr


def as_vector(y, n=None, name="y"):
    arr = as_float_array(y, name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {arr.shape[0]}")
    return arr


def check_square_symmetric(K, rtol=1e-12, name="K"):
    """Validate a square symmetric matrix; tolerance is relative to max |entry|."""
    arr = as_float_array(K, name)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    scale = np.abs(arr).max()
    if scale > 0 and np.abs(arr - arr.T).max() > rtol * scale:
        raise ValueError(f"{name} is not symmetric to within {rtol:g} relative")
    return arr
