"""Target alignment scores and synthetic alignment spectra.

The alignment scores of a target are its coordinates in the kernel
eigenvector basis: scores = U^T (f_values / sqrt(n)). Their decay profile
is what drives the risk formulas, so this module also synthesizes the
standard profiles: bandlimited, multiband, and polynomially decaying.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .validation import as_vector

__all__ = [
    "AlignmentRegime",
    "AlignmentSpectrum",
    "SyntheticSpectra",
    "alignment_scores",
    "synthesize_target",
    "bandlimited_spectrum",
    "multiband_spectrum",
    "polynomial_spectra",
    "classify_regime",
    "write_spectrum_csv",
    "read_spectrum_csv",
]


class AlignmentRegime(enum.Enum):
    UNDER_ALIGNED = "under-aligned"
    JUST_ALIGNED = "just-aligned"
    WEAKLY_ALIGNED = "weakly-aligned"
    OVER_ALIGNED = "over-aligned"


@dataclass(frozen=True)
class AlignmentSpectrum:
    """Alignment scores plus a record of how they were generated."""

    scores: np.ndarray
    provenance: str = "empirical"
    seed: int | None = None

    @property
    def n(self):
        return self.scores.shape[0]


@dataclass(frozen=True)
class SyntheticSpectra:
    """Polynomially decaying eigenvalues and squared scores.

    eigvals[i] = (i+1)^(-alpha) and scores_sq[i] = (i+1)^(-2*gamma*alpha - 1),
    with all decay constants fixed to 1. Deliberately unnormalized: these
    parametrize a decay class, not a unit-norm target.
    """

    eigvals: np.ndarray
    scores_sq: np.ndarray
    alpha: float
    gamma: float

    @property
    def n(self):
        return self.eigvals.shape[0]


def alignment_scores(eigen, f_values):
    """Scores of a target from its values at the training points.

    Computes U^T (f_values / sqrt(n)); the 2-norm of the result equals the
    empirical norm of the target (Parseval, U orthogonal).
    """
    f_values = as_vector(f_values, n=eigen.n, name="f_values")
    scores = eigen.eigvecs.T @ (f_values / np.sqrt(eigen.n))
    return AlignmentSpectrum(scores=scores, provenance="empirical")


def synthesize_target(eigen, spectrum):
    """Training-point values sqrt(n) * U @ scores; inverse of alignment_scores."""
    scores = spectrum.scores if isinstance(spectrum, AlignmentSpectrum) else spectrum
    scores = as_vector(scores, n=eigen.n, name="scores")
    return np.sqrt(eigen.n) * (eigen.eigvecs @ scores)


def _check_band(n, b, ell):
    if b < 1:
        raise ValueError(f"band length b must be >= 1, got {b}")
    if ell < 0:
        raise ValueError(f"band offset ell must be >= 0, got {ell}")
    if ell + b > n:
        raise ValueError(f"band [{ell + 1}, {ell + b}] does not fit in n={n}")


def bandlimited_spectrum(n, b, ell, seed):
    """Unit-norm scores supported exactly on indices ell+1 .. ell+b.

    Nonzero entries are i.i.d. standard normal draws scaled to unit 2-norm,
    so each squared score has mean 1/b over draws.
    """
    _check_band(n, b, ell)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(b)
    scores = np.zeros(n)
    scores[ell : ell + b] = g / np.linalg.norm(g)
    return AlignmentSpectrum(
        scores=scores, provenance=f"bandlimited(b={b},ell={ell})", seed=seed
    )


def multiband_spectrum(n, bands, seed):
    """Unit-norm scores supported on a union of non-overlapping bands.

    ``bands`` is a sequence of (b, ell) pairs; draws are taken band by band
    in the given order and normalized jointly, so a single band reproduces
    :func:`bandlimited_spectrum` exactly.
    """
    if not bands:
        raise ValueError("bands must be nonempty")
    occupied = np.zeros(n, dtype=bool)
    for b, ell in bands:
        _check_band(n, b, ell)
        window = slice(ell, ell + b)
        if occupied[window].any():
            raise ValueError(f"band (b={b}, ell={ell}) overlaps another band")
        occupied[window] = True
    rng = np.random.default_rng(seed)
    draws = np.concatenate([rng.standard_normal(b) for b, _ in bands])
    draws /= np.linalg.norm(draws)
    scores = np.zeros(n)
    offset = 0
    for b, ell in bands:
        scores[ell : ell + b] = draws[offset : offset + b]
        offset += b
    label = ",".join(f"{b}:{ell}" for b, ell in bands)
    return AlignmentSpectrum(scores=scores, provenance=f"multiband({label})", seed=seed)


def polynomial_spectra(n, alpha, gamma):
    """Synthetic decay class: eigvals i^(-alpha), squared scores i^(-2*gamma*alpha - 1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    i = np.arange(1, n + 1, dtype=float)
    return SyntheticSpectra(
        eigvals=i ** (-float(alpha)),
        scores_sq=i ** (-2.0 * gamma * alpha - 1.0),
        alpha=float(alpha),
        gamma=float(gamma),
    )


def classify_regime(gamma):
    """Map the score-decay exponent to its alignment regime.

    gamma = 1/2 sits exactly on the in-RKHS boundary; labeling it
    just-aligned is a convention for the boundary value.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if gamma < 0.5:
        return AlignmentRegime.UNDER_ALIGNED
    if gamma == 0.5:
        return AlignmentRegime.JUST_ALIGNED
    if gamma <= 1.0:
        return AlignmentRegime.WEAKLY_ALIGNED
    return AlignmentRegime.OVER_ALIGNED


def write_spectrum_csv(path, spectrum):
    from .io import write_table_csv

    meta = {"schema": "spectrum", "provenance": spectrum.provenance}
    if spectrum.seed is not None:
        meta["seed"] = spectrum.seed
    rows = [(i + 1, s) for i, s in enumerate(spectrum.scores)]
    write_table_csv(path, meta, ["index", "score"], rows)


def read_spectrum_csv(path):
    from .io import read_table_csv, require_columns

    meta, header, rows = read_table_csv(path)
    idx = require_columns(header, ["index", "score"], path)
    scores = np.full(len(rows), np.nan)
    for row in rows:
        scores[int(row[idx[0]]) - 1] = float(row[idx[1]])
    seed = meta.get("seed")
    return AlignmentSpectrum(
        scores=scores,
        provenance=meta.get("provenance", "empirical"),
        seed=int(seed) if seed is not None else None,
    )
