"""Regularization-curve, surface, and convergence-rate experiment drivers.

Each driver evaluates the closed-form expected MSE over a parameter grid
and returns a table; cells are independent evaluations, never incremental
updates. The rate study sweeps sample sizes with synthetic polynomial
spectra, takes the per-size minimum over a shared ridge grid for the
truncated and the full estimator, and fits log-log slopes.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alignment import polynomial_spectra
from .risk import exact_mse, exact_mse_from_squares, optimal_params
from .validation import as_vector

__all__ = [
    "CurveTable",
    "SurfaceTable",
    "RateStudyResult",
    "GapTable",
    "log_lambda_grid",
    "lambda_curve",
    "r_curve",
    "surface",
    "rate_study",
    "log_mse_gap",
    "write_curve_csv",
    "write_surface_csv",
    "write_rate_study_csv",
    "write_gap_csv",
]


@dataclass
class CurveTable:
    """Per-(noise level, sweep value) MSE decompositions, sorted rows."""

    axis: str
    sweep_values: np.ndarray
    sigma_keys: np.ndarray
    bias_reg: np.ndarray
    bias_tail: np.ndarray
    variance: np.ndarray
    total: np.ndarray
    metadata: dict = field(default_factory=dict)

    def rows(self):
        for i in range(self.sweep_values.shape[0]):
            yield (
                self.sweep_values[i],
                self.sigma_keys[i],
                self.bias_reg[i],
                self.bias_tail[i],
                self.variance[i],
                self.total[i],
            )


@dataclass
class SurfaceTable:
    """Dense rectangular grid of MSE totals, row-major over (axis1, axis2)."""

    axis1_name: str
    axis2_name: str
    axis1_values: np.ndarray
    axis2_values: np.ndarray
    totals: np.ndarray  # shape (len(axis1), len(axis2))
    metadata: dict = field(default_factory=dict)


@dataclass
class RateStudyResult:
    n_grid: np.ndarray
    r_star: np.ndarray
    min_mse_tkrr: np.ndarray
    argmin_lambda_tkrr: np.ndarray
    min_mse_full: np.ndarray
    argmin_lambda_full: np.ndarray
    slope_tkrr: float
    slope_full: float
    dropped_smallest: int
    metadata: dict = field(default_factory=dict)


@dataclass
class GapTable:
    alpha: np.ndarray
    sigma: np.ndarray
    n: np.ndarray
    log_min_full: np.ndarray
    log_min_tkrr: np.ndarray
    gap: np.ndarray
    metadata: dict = field(default_factory=dict)


def log_lambda_grid(lo, hi, count):
    """count ridge levels with equal steps in log10, from lo to hi inclusive."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not (0 < lo <= hi):
        raise ValueError(f"need 0 < lo <= hi, got lo={lo}, hi={hi}")
    return np.logspace(np.log10(lo), np.log10(hi), int(count))


def _check_grid(values, name):
    values = as_vector(np.asarray(values, dtype=float), name=name)
    if values.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if values.size > 1 and not np.all(np.diff(values) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return values


def _curve(axis, cells, metadata):
    # cells: list of (sweep_value, sigma_key, MseReport), sorted by caller
    sweep = np.array([c[0] for c in cells])
    keys = np.array([c[1] for c in cells])
    return CurveTable(
        axis=axis,
        sweep_values=sweep,
        sigma_keys=keys,
        bias_reg=np.array([c[2].bias_reg for c in cells]),
        bias_tail=np.array([c[2].bias_tail for c in cells]),
        variance=np.array([c[2].variance for c in cells]),
        total=np.array([c[2].total for c in cells]),
        metadata=dict(metadata or {}),
    )


def lambda_curve(eigvals, scores, r, lambda_grid, sigma_list, n, metadata=None):
    """Expected-MSE rows over a ridge grid, one block per noise level."""
    lambda_grid = _check_grid(lambda_grid, "lambda_grid")
    cells = []
    for sigma in sorted(sigma_list):
        for lam in lambda_grid:
            cells.append((lam, sigma, exact_mse(eigvals, scores, r, lam, sigma, n)))
    return _curve("lambda", cells, metadata)


def r_curve(eigvals, scores, lam, r_values, sigma_over_sqrtn_list, n, metadata=None):
    """Expected-MSE rows over truncation levels, keyed by sigma/sqrt(n)."""
    r_values = [int(r) for r in r_values]
    if not r_values:
        raise ValueError("r_values must be nonempty")
    if any(not (1 <= r <= n) for r in r_values):
        raise ValueError(f"r_values must lie in [1, {n}]")
    cells = []
    for key in sorted(sigma_over_sqrtn_list):
        sigma = key * np.sqrt(n)
        for r in sorted(r_values):
            cells.append((r, key, exact_mse(eigvals, scores, r, lam, sigma, n)))
    return _curve("r", cells, metadata)


_AXIS_NAMES = ("lambda", "r", "sigma", "sigma_over_sqrtn")


def surface(eigvals, scores, n, axis1, axis2, fixed=None, metadata=None, threads=1):
    """Grid of MSE totals over two swept parameters.

    ``axis1``/``axis2`` are (name, values) pairs with names from
    {lambda, r, sigma, sigma_over_sqrtn}; ``fixed`` supplies the parameters
    not swept. Cells are pure and evaluated independently, so the optional
    thread pool cannot change the result.
    """
    (name1, values1), (name2, values2) = axis1, axis2
    for name in (name1, name2):
        if name not in _AXIS_NAMES:
            raise ValueError(f"unknown axis '{name}', expected one of {_AXIS_NAMES}")
    if name1 == name2:
        raise ValueError("axis names must differ")
    values1 = np.asarray(list(values1), dtype=float)
    values2 = np.asarray(list(values2), dtype=float)
    if values1.size == 0 or values2.size == 0:
        raise ValueError("axis grids must be nonempty")

    base = dict(fixed or {})

    def cell(v1, v2):
        params = dict(base)
        params[name1] = v1
        params[name2] = v2
        if "sigma_over_sqrtn" in params:
            params["sigma"] = params.pop("sigma_over_sqrtn") * np.sqrt(n)
        missing = {"lambda", "r", "sigma"} - params.keys()
        if missing:
            raise ValueError(f"missing fixed parameter(s): {sorted(missing)}")
        report = exact_mse(
            eigvals, scores, int(params["r"]), params["lambda"], params["sigma"], n
        )
        return report.total

    pairs = [(v1, v2) for v1 in values1 for v2 in values2]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            flat = list(pool.map(lambda p: cell(*p), pairs))
    else:
        flat = [cell(v1, v2) for v1, v2 in pairs]
    totals = np.array(flat).reshape(values1.size, values2.size)
    return SurfaceTable(
        axis1_name=name1,
        axis2_name=name2,
        axis1_values=values1,
        axis2_values=values2,
        totals=totals,
        metadata=dict(metadata or {}),
    )


def _min_over_lambda(eigvals, scores_sq, r, lambda_grid, sigma, n, chunk=128):
    """Minimum MSE over the ridge grid and its argmin (first minimum wins,
    which is the smallest ridge level on an increasing grid)."""
    best_val = np.inf
    best_lam = lambda_grid[0]
    tail = float(np.sum(scores_sq[r:]))
    mu = eigvals[:r]
    s_sq = scores_sq[:r]
    s2n = sigma * sigma / n
    for lo in range(0, lambda_grid.size, chunk):
        lams = lambda_grid[lo : lo + chunk]
        denom = (mu[None, :] + lams[:, None]) ** 2
        totals = (
            lams**2 * np.sum(s_sq[None, :] / denom, axis=1)
            + tail
            + s2n * np.sum(mu[None, :] ** 2 / denom, axis=1)
        )
        idx = int(np.argmin(totals))
        if totals[idx] < best_val:
            best_val = float(totals[idx])
            best_lam = float(lams[idx])
    return best_val, best_lam


def rate_study(alpha, gamma, n_grid, sigma, lambda_grid, drop_smallest=0, metadata=None):
    """Per-sample-size minimum MSE for truncated vs full estimators, with slopes.

    For each n the truncated estimator uses the closed-form optimal level
    r_star(n) and the full estimator uses r = n; both minimize over the
    same ridge grid. Slopes are least squares on (log n, log min MSE),
    optionally dropping the smallest sample sizes from the fit (the count
    is recorded in the result).
    """
    lambda_grid = _check_grid(lambda_grid, "lambda_grid")
    n_grid = sorted(int(n) for n in n_grid)
    if not n_grid:
        raise ValueError("n_grid must be nonempty")
    if drop_smallest < 0 or drop_smallest > len(n_grid) - 2:
        raise ValueError(f"drop_smallest must leave >= 2 points, got {drop_smallest}")
    r_stars, mins_t, args_t, mins_f, args_f = [], [], [], [], []
    for n in n_grid:
        spectra = polynomial_spectra(n, alpha, gamma)
        r_star = optimal_params(alpha, gamma, n, sigma * sigma).r_star
        v, a = _min_over_lambda(spectra.eigvals, spectra.scores_sq, r_star, lambda_grid, sigma, n)
        r_stars.append(r_star)
        mins_t.append(v)
        args_t.append(a)
        v, a = _min_over_lambda(spectra.eigvals, spectra.scores_sq, n, lambda_grid, sigma, n)
        mins_f.append(v)
        args_f.append(a)
    keep = slice(drop_smallest, None)
    log_n = np.log(np.asarray(n_grid, dtype=float))
    slope_t = float(np.polyfit(log_n[keep], np.log(mins_t)[keep], 1)[0])
    slope_f = float(np.polyfit(log_n[keep], np.log(mins_f)[keep], 1)[0])
    meta = dict(metadata or {})
    meta.update(
        alpha=alpha, gamma=gamma, sigma=sigma,
        lambda_grid_lo=float(lambda_grid[0]), lambda_grid_hi=float(lambda_grid[-1]),
        lambda_grid_count=int(lambda_grid.size),
    )
    return RateStudyResult(
        n_grid=np.asarray(n_grid),
        r_star=np.asarray(r_stars),
        min_mse_tkrr=np.asarray(mins_t),
        argmin_lambda_tkrr=np.asarray(args_t),
        min_mse_full=np.asarray(mins_f),
        argmin_lambda_full=np.asarray(args_f),
        slope_tkrr=slope_t,
        slope_full=slope_f,
        dropped_smallest=int(drop_smallest),
        metadata=meta,
    )


def log_mse_gap(alpha_list, gamma, sigma_list, n_grid, lambda_grid, metadata=None):
    """log(min full MSE) - log(min truncated MSE) per (alpha, sigma, n)."""
    rows_alpha, rows_sigma, rows_n = [], [], []
    rows_full, rows_tkrr = [], []
    for alpha in alpha_list:
        for sigma in sigma_list:
            study = rate_study(alpha, gamma, n_grid, sigma, lambda_grid)
            for i, n in enumerate(study.n_grid):
                rows_alpha.append(alpha)
                rows_sigma.append(sigma)
                rows_n.append(int(n))
                rows_full.append(np.log(study.min_mse_full[i]))
                rows_tkrr.append(np.log(study.min_mse_tkrr[i]))
    log_full = np.asarray(rows_full)
    log_tkrr = np.asarray(rows_tkrr)
    meta = dict(metadata or {})
    meta.update(gamma=gamma)
    return GapTable(
        alpha=np.asarray(rows_alpha),
        sigma=np.asarray(rows_sigma),
        n=np.asarray(rows_n),
        log_min_full=log_full,
        log_min_tkrr=log_tkrr,
        gap=log_full - log_tkrr,
        metadata=meta,
    )


def write_curve_csv(path, table):
    from .io import write_table_csv

    meta = {"schema": "curve", "axis": table.axis}
    meta.update(table.metadata)
    sigma_col = "sigma" if table.axis == "lambda" else "sigma_over_sqrtn"
    write_table_csv(
        path,
        meta,
        ["sweep_value", sigma_col, "bias_reg", "bias_tail", "variance", "total"],
        table.rows(),
    )


def write_surface_csv(path, table):
    from .io import write_table_csv

    meta = {"schema": "surface", "axis1": table.axis1_name, "axis2": table.axis2_name}
    meta.update(table.metadata)
    rows = [
        (v1, v2, table.totals[i, j])
        for i, v1 in enumerate(table.axis1_values)
        for j, v2 in enumerate(table.axis2_values)
    ]
    write_table_csv(path, meta, [table.axis1_name, table.axis2_name, "total"], rows)


def write_rate_study_csv(path, result):
    from .io import write_table_csv

    meta = {
        "schema": "rates",
        "slope_tkrr": result.slope_tkrr,
        "slope_full": result.slope_full,
        "dropped_smallest": result.dropped_smallest,
    }
    meta.update(result.metadata)
    rows = [
        (
            int(result.n_grid[i]),
            int(result.r_star[i]),
            result.min_mse_tkrr[i],
            result.argmin_lambda_tkrr[i],
            result.min_mse_full[i],
            result.argmin_lambda_full[i],
        )
        for i in range(result.n_grid.shape[0])
    ]
    write_table_csv(
        path,
        meta,
        ["n", "r_star", "min_mse_tkrr", "argmin_lambda_tkrr", "min_mse_full", "argmin_lambda_full"],
        rows,
    )


def write_gap_csv(path, table):
    from .io import write_table_csv

    meta = {"schema": "gap"}
    meta.update(table.metadata)
    rows = [
        (
            table.alpha[i],
            table.sigma[i],
            int(table.n[i]),
            table.log_min_full[i],
            table.log_min_tkrr[i],
            table.gap[i],
        )
        for i in range(table.n.shape[0])
    ]
    write_table_csv(
        path, meta, ["alpha", "sigma", "n", "log_min_full", "log_min_tkrr", "gap"], rows
    )
