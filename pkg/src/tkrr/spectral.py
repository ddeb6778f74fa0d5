"""Eigendecomposition of the kernel matrix and the spectral machinery built on it.

Provides the descending eigensystem of K, the diagonal shrinkage filter
mu_i / (mu_i + lam) on the kept band, the rank-r truncated kernel matrix,
and out-of-sample evaluation through the min-norm basis functions that
interpolate sqrt(n) times each eigenvector at the training points.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .validation import (
    DegeneracyError,
    NumericalFailureError,
    as_points,
    as_vector,
    check_square_symmetric,
)

__all__ = [
    "EigenSystem",
    "SpectralFilter",
    "EigenvalueFlooringWarning",
    "TruncationSplitWarning",
    "eigendecompose",
    "jacobi_eigh",
    "spectral_filter",
    "truncated_kernel_matrix",
    "min_norm_basis_eval",
    "min_norm_basis_matrix",
    "truncated_kernel_eval",
    "write_eigen_csv",
    "read_eigen_csv",
]

# Eigenvalues below FLOOR_RTOL * mu_1 are treated as exact zeros.
FLOOR_RTOL = 1e-12
# Eigenvalues below -PSD_RTOL * mu_1 mean the input was not positive semidefinite.
PSD_RTOL = 1e-10


class EigenvalueFlooringWarning(UserWarning):
    """Some eigenvalues were floored to zero as numerically negligible."""


class TruncationSplitWarning(UserWarning):
    """The truncation level splits a repeated eigenvalue."""


@dataclass(frozen=True)
class EigenSystem:
    """Descending eigenvalues and orthonormal eigenvectors of a kernel matrix.

    ``eigvals[k]`` pairs with the column ``eigvecs[:, k]``. Columns follow a
    fixed sign convention: the largest-magnitude entry of each eigenvector is
    positive (ties broken by lowest index), so repeated runs produce
    identical matrices.
    """

    eigvals: np.ndarray
    eigvecs: np.ndarray

    @property
    def n(self):
        return self.eigvals.shape[0]

    def leading(self, r):
        """Views of the leading r eigenvalues and eigenvector columns."""
        return self.eigvals[:r], self.eigvecs[:, :r]

    def check_r(self, r):
        if not (1 <= r <= self.n):
            raise ValueError(f"truncation level r must be in [1, {self.n}], got {r}")
        return int(r)


def _fix_signs(U):
    idx = np.argmax(np.abs(U), axis=0)
    flip = U[idx, np.arange(U.shape[1])] < 0
    U[:, flip] *= -1.0
    return U


def jacobi_eigh(A, tol=1e-13, max_sweeps=100):
    """Cyclic Jacobi eigensolver for symmetric matrices.

    Dependency-light fallback for :func:`eigendecompose`; much slower than
    LAPACK but fully deterministic and accurate to ~machine precision.
    Returns (eigenvalues ascending, eigenvector columns).
    """
    A = check_square_symmetric(A, name="A").copy()
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.abs(A).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= tol * scale * 1e-3:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise NumericalFailureError("Jacobi eigensolver did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def eigendecompose(K, method="lapack"):
    """Symmetric eigendecomposition of a normalized kernel matrix.

    Eigenvalues are sorted in descending order; values below
    ``FLOOR_RTOL * mu_1`` are floored to exactly zero (with a warning), and
    eigenvector columns get the fixed sign convention. Raises
    :class:`~tkrr.validation.NumericalFailureError` if the solver fails or
    the input has a significantly negative eigenvalue.
    """
    K = check_square_symmetric(K, name="K")
    if method == "lapack":
        try:
            w, U = np.linalg.eigh(K)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError(f"eigensolver failed: {exc}") from exc
    elif method == "jacobi":
        w, U = jacobi_eigh(K)
    else:
        raise ValueError(f"unknown eigensolver method '{method}'")

    w = w[::-1].copy()
    U = U[:, ::-1].copy()
    top = w[0] if w[0] > 0 else 0.0
    if top == 0.0 and np.all(w == 0.0):
        pass
    elif w[-1] < -PSD_RTOL * top:
        raise NumericalFailureError(
            f"matrix is not positive semidefinite: min eigenvalue {w[-1]:.3e} "
            f"vs top {top:.3e}"
        )
    floor_mask = w < FLOOR_RTOL * top
    if np.any(floor_mask):
        warnings.warn(
            f"floored {int(floor_mask.sum())} eigenvalue(s) below "
            f"{FLOOR_RTOL:g} * mu_1 to zero",
            EigenvalueFlooringWarning,
            stacklevel=2,
        )
        w[floor_mask] = 0.0
    return EigenSystem(eigvals=w, eigvecs=_fix_signs(U))


@dataclass(frozen=True)
class SpectralFilter:
    """Diagonal shrinkage factors mu_i/(mu_i + lam) on modes 1..r, zero beyond."""

    values: np.ndarray
    r: int
    lam: float


def _warn_if_split(eigvals, r):
    if r < eigvals.shape[0] and eigvals[r - 1] == eigvals[r]:
        warnings.warn(
            f"truncation at r={r} splits a repeated eigenvalue "
            f"({eigvals[r - 1]:.6g})",
            TruncationSplitWarning,
            stacklevel=3,
        )


def spectral_filter(eigen, lam, r):
    """Filter values mu_i/(mu_i + lam) for i <= r, zero for i > r."""
    r = eigen.check_r(r)
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if lam == 0 and eigen.eigvals[r - 1] <= 0:
        raise DegeneracyError(
            f"lam=0 requires mu_r > 0, but mu_{r} = {eigen.eigvals[r - 1]!r}"
        )
    _warn_if_split(eigen.eigvals, r)
    values = np.zeros(eigen.n)
    kept = eigen.eigvals[:r]
    values[:r] = np.divide(kept, kept + lam, out=np.zeros(r), where=(kept + lam) > 0)
    return SpectralFilter(values=values, r=r, lam=float(lam))


def truncated_kernel_matrix(eigen, r):
    """Rank-r spectral truncation sum_{k<=r} mu_k u_k u_k^T of the kernel matrix."""
    r = eigen.check_r(r)
    _warn_if_split(eigen.eigvals, r)
    vals, vecs = eigen.leading(r)
    return (vecs * vals) @ vecs.T


def min_norm_basis_matrix(eigen, X, spec, points):
    """Evaluate all basis functions at query points; entry (i, k) is basis k at point i.

    Basis function k is the minimum-RKHS-norm interpolant of the values
    sqrt(n) * u_k at the training points; closed form
    (1/(sqrt(n) mu_k)) * sum_j u_{kj} k(x, x_j). Columns with mu_k = 0 are
    NaN (no interpolant exists there).
    """
    X = as_points(X, "X")
    points = as_points(points, "points")
    n = eigen.n
    cross = spec.pairwise(points, X)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (cross @ eigen.eigvecs) / (np.sqrt(n) * eigen.eigvals[None, :])
    return out


def min_norm_basis_eval(eigen, X, spec, k, x):
    """Evaluate basis function k (0-based) at a single point x.

    At a training point x_i the value is sqrt(n) * u_{ki}.
    """
    if not (0 <= k < eigen.n):
        raise ValueError(f"basis index k must be in [0, {eigen.n - 1}], got {k}")
    if eigen.eigvals[k] <= 0:
        raise DegeneracyError(f"basis function {k} undefined: mu_{k + 1} = 0")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    X = as_points(X, "X")
    cross = spec.pairwise(x, X)[0]
    return float(cross @ eigen.eigvecs[:, k] / (np.sqrt(eigen.n) * eigen.eigvals[k]))


def truncated_kernel_eval(eigen, X, spec, r, x, y):
    """Truncated kernel function sum_{k<=r} mu_k basis_k(x) basis_k(y).

    On training pairs this equals n times the truncated kernel matrix entry.
    """
    r = eigen.check_r(r)
    if eigen.eigvals[r - 1] <= 0:
        raise DegeneracyError(f"truncated kernel needs mu_r > 0, got mu_{r} = 0")
    pts = np.vstack([np.atleast_1d(np.asarray(x, dtype=float)),
                     np.atleast_1d(np.asarray(y, dtype=float))])
    B = min_norm_basis_matrix(eigen, X, spec, pts)[:, :r]
    return float(np.sum(eigen.eigvals[:r] * B[0] * B[1]))


def write_eigen_csv(path, eigen, metadata=None):
    """Serialize an eigensystem: first data row mu (descending), then one row per eigenvector."""
    from .io import format_float, metadata_block

    meta = dict(metadata or {})
    meta.setdefault("schema", "eigen")
    meta.setdefault("sign_convention", "largest-magnitude entry positive, ties lowest index")
    with open(path, "w", newline="\n") as fh:
        fh.write(metadata_block(meta))
        fh.write(",".join(format_float(v) for v in eigen.eigvals) + "\n")
        for k in range(eigen.n):
            fh.write(",".join(format_float(v) for v in eigen.eigvecs[:, k]) + "\n")


def read_eigen_csv(path):
    """Load an eigensystem written by :func:`write_eigen_csv`; returns (eigen, metadata)."""
    from .io import parse_metadata_lines

    meta_lines = []
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                meta_lines.append(line)
                continue
            rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError(f"no data rows in {path}")
    eigvals = np.asarray(rows[0], dtype=float)
    n = eigvals.shape[0]
    if len(rows) != n + 1:
        raise ValueError(f"expected {n} eigenvector rows in {path}, got {len(rows) - 1}")
    U = np.array(rows[1:], dtype=float).T
    return EigenSystem(eigvals=eigvals, eigvecs=U), parse_metadata_lines(meta_lines)
