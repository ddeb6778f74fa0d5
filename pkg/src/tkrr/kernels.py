"""Covariate sampling, kernel evaluation, and the normalized kernel matrix.

The empirical kernel matrix used throughout is K = (1/n) (k(x_i, x_j))_ij,
i.e. the Gram matrix of the kernel divided by the sample count.
"""

import math
from dataclasses import dataclass

import numpy as np

from .validation import as_points, as_vector

__all__ = [
    "GaussianKernel",
    "kernel_from_name",
    "sample_uniform_cube",
    "kernel_eval",
    "kernel_matrix",
    "read_points_csv",
    "write_points_csv",
]


@dataclass(frozen=True)
class GaussianKernel:
    """Gaussian (RBF) kernel k(x, y) = exp(-||x - y||^2 / (2 h^2)).

    The exponent uses the squared Euclidean distance; ``bandwidth`` is h.
    """

    bandwidth: float

    def __post_init__(self):
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be positive and finite, got {self.bandwidth}")

    @classmethod
    def for_dim(cls, d):
        """Default bandwidth h = sqrt(d/2) for d-dimensional inputs."""
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        return cls(bandwidth=math.sqrt(d / 2.0))

    @property
    def name(self):
        return "gaussian"

    def pairwise(self, X, Y=None):
        """Unnormalized Gram matrix k(x_i, y_j) for rows of X and Y."""
        X = as_points(X, "X")
        Y = X if Y is None else as_points(Y, "Y")
        if X.shape[1] != Y.shape[1]:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
        sq_x = np.sum(X * X, axis=1)
        sq_y = np.sum(Y * Y, axis=1)
        d2 = sq_x[:, None] + sq_y[None, :] - 2.0 * (X @ Y.T)
        np.maximum(d2, 0.0, out=d2)
        return np.exp(-d2 / (2.0 * self.bandwidth**2))


_KERNELS = {"gaussian": GaussianKernel}


def kernel_from_name(name, bandwidth):
    try:
        cls = _KERNELS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown kernel '{name}', available: {sorted(_KERNELS)}") from None
    return cls(bandwidth=bandwidth)


def sample_uniform_cube(n, d, seed):
    """Draw n points uniformly from [0, 1)^d, deterministic in the seed."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    return rng.random((n, d))


def kernel_eval(spec, x, y):
    """Evaluate the kernel on a single pair of points."""
    x = as_vector(np.atleast_1d(np.asarray(x, dtype=float)), name="x")
    y = as_vector(np.atleast_1d(np.asarray(y, dtype=float)), name="y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(spec.pairwise(x[None, :], y[None, :])[0, 0])


def kernel_matrix(X, spec):
    """Normalized kernel matrix K with K[i, j] = k(x_i, x_j) / n.

    The result is explicitly symmetrized; entries are pure functions of
    the corresponding point pair, so construction order never matters.
    """
    X = as_points(X, "X")
    n = X.shape[0]
    K = spec.pairwise(X) / n
    return 0.5 * (K + K.T)


def write_points_csv(path, X):
    """Write covariates as headerless CSV, one point per row."""
    X = as_points(X, "X")
    with open(path, "w", newline="\n") as fh:
        for row in X:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def read_points_csv(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return as_points(np.array(rows, dtype=float), "points")
