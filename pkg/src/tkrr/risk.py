"""Exact and surrogate expected MSE of the truncated kernel ridge estimator.

Under y_i = f(x_i) + noise with noise variance sigma^2, the expected
empirical MSE of the spectral fit decomposes exactly into

    bias_reg  = sum_{i<=r} lam^2 scores_i^2 / (mu_i + lam)^2
    bias_tail = sum_{i>r}  scores_i^2
    variance  = (sigma^2/n) sum_{i<=r} mu_i^2 / (mu_i + lam)^2

in terms of the kernel eigenvalues mu and the target alignment scores.
This module evaluates that closed form, a Monte Carlo oracle for it, the
bandlimited-prior average with its non-monotonicity threshold index, the
polynomial-decay surrogate, and the closed-form optimal parameters and
rate exponents.
"""

import math
from dataclasses import dataclass

import numpy as np

from .validation import DegeneracyError, as_vector

__all__ = [
    "MseReport",
    "RateParams",
    "exact_mse",
    "exact_mse_from_squares",
    "monte_carlo_mse",
    "bayes_mse_bandlimited",
    "jstar",
    "surrogate_mse",
    "optimal_params",
    "rate_exponent",
    "write_mse_report_csv",
]


@dataclass(frozen=True)
class MseReport:
    """Additive decomposition of the expected MSE at one (lam, r, sigma, n)."""

    bias_reg: float
    bias_tail: float
    variance: float
    total: float
    sigma: float
    n: int
    lam: float
    r: int

    def csv_row(self):
        return (self.lam, self.r, self.sigma, self.n,
                self.bias_reg, self.bias_tail, self.variance, self.total)


MSE_REPORT_COLUMNS = ["lambda", "r", "sigma", "n",
                      "bias_reg", "bias_tail", "variance", "total"]


def _check_mse_args(eigvals, r, lam, sigma, n):
    eigvals = as_vector(eigvals, name="eigvals")
    if not (1 <= r <= eigvals.shape[0]):
        raise ValueError(f"r must be in [1, {eigvals.shape[0]}], got {r}")
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if lam == 0 and eigvals[r - 1] <= 0:
        raise DegeneracyError(f"lam=0 requires mu_r > 0, but mu_{r} = {eigvals[r - 1]!r}")
    return eigvals


def exact_mse_from_squares(eigvals, scores_sq, r, lam, sigma, n):
    """Closed-form expected MSE from squared alignment scores."""
    eigvals = _check_mse_args(eigvals, r, lam, sigma, n)
    scores_sq = as_vector(scores_sq, n=eigvals.shape[0], name="scores_sq")
    denom = (eigvals[:r] + lam) ** 2
    bias_reg = float(lam * lam * np.sum(scores_sq[:r] / denom))
    bias_tail = float(np.sum(scores_sq[r:]))
    variance = float(sigma * sigma / n * np.sum(eigvals[:r] ** 2 / denom))
    return MseReport(
        bias_reg=bias_reg,
        bias_tail=bias_tail,
        variance=variance,
        total=bias_reg + bias_tail + variance,
        sigma=float(sigma),
        n=int(n),
        lam=float(lam),
        r=int(r),
    )


def exact_mse(eigvals, scores, r, lam, sigma, n):
    """Closed-form expected MSE from alignment scores (not squared)."""
    scores = as_vector(scores, name="scores")
    return exact_mse_from_squares(eigvals, scores * scores, r, lam, sigma, n)


def monte_carlo_mse(eigvals, scores, r, lam, sigma, n, trials, seed):
    """Monte Carlo oracle for :func:`exact_mse`; returns (estimate, std_error).

    Averages || filter*(scores + z) - scores ||^2 over i.i.d. spectral noise
    z ~ N(0, (sigma^2/n) I). Single-threaded with numpy's pairwise-summed
    reductions, so the result depends only on the seed. Accepts an
    EigenSystem in place of the eigenvalue vector.
    """
    eigvals = getattr(eigvals, "eigvals", eigvals)
    eigvals = _check_mse_args(eigvals, r, lam, sigma, n)
    scores = as_vector(scores, n=eigvals.shape[0], name="scores")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    gains = eigvals[:r] / (eigvals[:r] + lam)
    bias_tail = float(np.sum(scores[r:] ** 2))
    shrink = (gains - 1.0) * scores[:r]
    if sigma == 0:
        return bias_tail + float(shrink @ shrink), 0.0
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((int(trials), r)) * (sigma / math.sqrt(n))
    vals = np.sum((shrink[None, :] + gains[None, :] * z) ** 2, axis=1) + bias_tail
    estimate = float(vals.mean())
    std_error = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return estimate, std_error


def bayes_mse_bandlimited(eigvals, b, ell, r, lam, sigma, n):
    """Expected MSE averaged over the bandlimited prior on the scores.

    The prior puts mean squared score 1/b on indices ell+1 .. ell+b and
    zero elsewhere; the average has the closed form

        1 - (1/b) sum_{i=ell+1}^{min(ell+b, r)} a_i / (mu_i + lam)^2
          + (sigma^2/n) sum_{i<=r} mu_i^2 / (mu_i + lam)^2

    with a_i = (mu_i + lam)^2 - lam^2.
    """
    eigvals = _check_mse_args(eigvals, r, lam, sigma, n)
    if ell + b > eigvals.shape[0]:
        raise ValueError(f"band [{ell + 1}, {ell + b}] does not fit in n={eigvals.shape[0]}")
    hi = min(ell + b, r)
    align = 0.0
    if hi >= ell + 1:
        mu_band = eigvals[ell:hi]
        a = (mu_band + lam) ** 2 - lam * lam
        align = float(np.sum(a / (mu_band + lam) ** 2)) / b
    denom = (eigvals[:r] + lam) ** 2
    variance = float(sigma * sigma / n * np.sum(eigvals[:r] ** 2 / denom))
    return 1.0 - align + variance


def jstar(eigvals, b, ell, lam, sigma, n):
    """Smallest band index i with 1 + 2*lam/mu_i > (sigma^2/n)*b, else None.

    Marks where growing the truncation level through the band switches from
    hurting to helping; None means no index in the band qualifies.
    """
    eigvals = as_vector(eigvals, name="eigvals")
    if ell + b > eigvals.shape[0]:
        raise ValueError(f"band [{ell + 1}, {ell + b}] does not fit in n={eigvals.shape[0]}")
    threshold = sigma * sigma / n * b
    for i in range(ell + 1, ell + b + 1):
        mu_i = eigvals[i - 1]
        if mu_i <= 0:
            raise DegeneracyError(f"jstar needs positive eigenvalues in the band, mu_{i} = 0")
        if 1.0 + 2.0 * lam / mu_i > threshold:
            return i
    return None


def surrogate_mse(alpha, gamma, r, lam, sigma, n):
    """Constant-free surrogate for the MSE under polynomial decay.

        lam^2 * max(1, eta^(-2(gamma-1)alpha)) + r^(-2 gamma alpha) [r < n]
        + (sigma^2/n) * eta,        eta = min(r, lam^(-1/alpha)).

    Asymptotic device only: lam must be strictly positive here.
    """
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if lam <= 0:
        raise ValueError(f"surrogate_mse requires lam > 0, got {lam}")
    if not (1 <= r <= n):
        raise ValueError(f"r must be in [1, {n}], got {r}")
    eta = min(float(r), lam ** (-1.0 / alpha))
    bias_head = lam * lam * max(1.0, eta ** (-2.0 * (gamma - 1.0) * alpha))
    bias_tail = float(r) ** (-2.0 * gamma * alpha) if r < n else 0.0
    return bias_head + bias_tail + sigma * sigma / n * eta


@dataclass(frozen=True)
class RateParams:
    """Closed-form parameter choices for the polynomial decay class.

    ``lambda_star``/``r_star`` are the truncated-estimator choices;
    ``lambda_full`` is the best full-KRR ridge level, whose exponent uses
    delta = min(1, gamma). ``eta`` is min(r_star, lambda_star^(-1/alpha)).
    """

    alpha: float
    gamma: float
    n: int
    sigma_sq: float
    lambda_star: float
    r_star: int
    eta: float
    lambda_full: float


def optimal_params(alpha, gamma, n, sigma_sq):
    """Rate-optimal ridge and truncation levels, decay constants fixed to 1.

    r_star is the integer part of (n/sigma^2)^(1/(2 gamma alpha + 1)),
    clamped to [1, n]. Flooring keeps the variance term (sigma^2/n) * r from
    overshooting at small n, where rounding the exact power up would double
    it; see the regression tests for the rate consequences.
    """
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if sigma_sq <= 0:
        raise ValueError(f"sigma_sq must be > 0, got {sigma_sq}")
    noise_rate = sigma_sq / n
    exponent = 2.0 * gamma * alpha + 1.0
    lambda_star = noise_rate ** (gamma * alpha / exponent)
    r_star = int(min(max(math.floor((1.0 / noise_rate) ** (1.0 / exponent)), 1), n))
    delta = min(1.0, gamma)
    lambda_full = noise_rate ** (alpha / (2.0 * delta * alpha + 1.0))
    eta = min(float(r_star), lambda_star ** (-1.0 / alpha))
    return RateParams(
        alpha=float(alpha),
        gamma=float(gamma),
        n=int(n),
        sigma_sq=float(sigma_sq),
        lambda_star=lambda_star,
        r_star=r_star,
        eta=eta,
        lambda_full=lambda_full,
    )


def rate_exponent(gamma, alpha, estimator_kind):
    """Power of (sigma^2/n) in the optimal MSE rate.

    The truncated estimator attains s(gamma) = 2 gamma alpha/(2 gamma alpha + 1);
    full KRR is capped at s(min(1, gamma)).
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if estimator_kind == "tkrr":
        g = gamma
    elif estimator_kind == "full_krr":
        g = min(1.0, gamma)
    else:
        raise ValueError(f"estimator_kind must be 'tkrr' or 'full_krr', got {estimator_kind!r}")
    return 2.0 * g * alpha / (2.0 * g * alpha + 1.0)


def write_mse_report_csv(path, report, metadata=None, extra_columns=(), extra_values=()):
    from .io import write_table_csv

    meta = {"schema": "mse"}
    meta.update(metadata or {})
    columns = MSE_REPORT_COLUMNS + list(extra_columns)
    write_table_csv(path, meta, columns, [report.csv_row() + tuple(extra_values)])
