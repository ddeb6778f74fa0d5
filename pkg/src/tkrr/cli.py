"""Command-line entry point: reproducible CSV-emitting runs.

Subcommands: spectrum, mse, curve, surface, rates. Every run takes a
single --seed; component randomness is derived by hashing the component
name into a subseed (sha256 of "<seed>:<component>", first 8 bytes as an
unsigned integer), so adding a component never shifts another one's
stream. All outputs use the CSV dialect of tkrr.io, embed the resolved
run manifest in their header, and are bitwise reproducible from the same
flags. Exit code 0 means every requested output was written and all
enabled self-checks passed.
"""

import argparse
import hashlib
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import (
    bandlimited_spectrum,
    multiband_spectrum,
    polynomial_spectra,
    read_spectrum_csv,
)
from .experiments import (
    lambda_curve,
    log_lambda_grid,
    log_mse_gap,
    r_curve,
    rate_study,
    surface,
    write_curve_csv,
    write_gap_csv,
    write_rate_study_csv,
    write_surface_csv,
)
from .io import RunManifest, write_table_csv
from .kernels import kernel_from_name, read_points_csv, sample_uniform_cube
from .risk import MSE_REPORT_COLUMNS, exact_mse_from_squares, monte_carlo_mse
from .spectral import eigendecompose, read_eigen_csv, write_eigen_csv
from .kernels import kernel_matrix

PRESET_RATES = {
    "alpha": 1.0,
    "gamma": 10.0,
    "sigma": 1.0,
    "n_grid": [2**k for k in range(8, 15)],
    "lambda_lo": 1e-10,
    "lambda_hi": 1e2,
    "lambda_count": 1000,
}


def subseed(seed, component):
    digest = hashlib.sha256(f"{seed}:{component}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _parse_grid(text, name):
    # "lo:hi:count" -> log-spaced grid
    parts = text.split(":")
    if len(parts) != 3:
        raise SystemExit(f"error: {name} must be LO:HI:COUNT, got '{text}'")
    return log_lambda_grid(float(parts[0]), float(parts[1]), int(parts[2]))


def _parse_floats(text):
    return [float(v) for v in text.split(",") if v]


def _parse_ints(text):
    return [int(v) for v in text.split(",") if v]


def _parse_bands(text):
    bands = []
    for chunk in text.split(","):
        b, ell = chunk.split(":")
        bands.append((int(b), int(ell)))
    return bands


def _r_value(text, n):
    if text in ("n", "full"):
        return n
    return int(text)


def _spectrum_source(args, parser):
    """Resolve (eigvals, scores or scores_sq, n, provenance) from flags."""
    if args.eigen:
        eigen, _ = read_eigen_csv(args.eigen)
        eigvals = eigen.eigvals
        n = eigen.n
        source = f"eigen:{args.eigen}"
    elif args.mu_alpha is not None:
        if args.n is None:
            parser.error("--mu-alpha requires --n")
        n = args.n
        eigvals = np.arange(1, n + 1, dtype=float) ** (-args.mu_alpha)
        source = f"synthetic(alpha={args.mu_alpha})"
    else:
        parser.error("need a spectrum source: --eigen or --mu-alpha")

    seed = subseed(args.seed, "alignment")
    if args.band:
        b, ell = args.band
        spec = bandlimited_spectrum(n, b, ell, seed)
        return eigvals, spec.scores**2, n, f"{source};{spec.provenance}"
    if args.bands:
        spec = multiband_spectrum(n, args.bands, seed)
        return eigvals, spec.scores**2, n, f"{source};{spec.provenance}"
    if args.scores:
        spec = read_spectrum_csv(args.scores)
        if spec.n != n:
            parser.error(f"scores file has n={spec.n}, expected {n}")
        return eigvals, spec.scores**2, n, f"{source};scores:{args.scores}"
    if args.gamma is not None:
        if args.mu_alpha is None:
            parser.error("--gamma (polynomial scores) requires --mu-alpha")
        spectra = polynomial_spectra(n, args.mu_alpha, args.gamma)
        return eigvals, spectra.scores_sq, n, f"{source};polynomial(gamma={args.gamma})"
    parser.error("need score flags: --band, --bands, --scores, or --gamma")


def _add_source_flags(p):
    p.add_argument("--eigen", help="eigensystem CSV from the spectrum command")
    p.add_argument("--mu-alpha", type=float, help="synthetic eigenvalues i^(-alpha)")
    p.add_argument("--n", type=int, help="size for synthetic eigenvalues")
    p.add_argument("--band", type=lambda s: tuple(int(v) for v in s.split(":")),
                   metavar="B:ELL", help="bandlimited scores on [ell+1, ell+b]")
    p.add_argument("--bands", type=_parse_bands, metavar="B:ELL,B:ELL",
                   help="multiband scores")
    p.add_argument("--scores", help="alignment-spectrum CSV")
    p.add_argument("--gamma", type=float, help="polynomial score decay exponent")


def _finish(manifest, out_dir):
    manifest.write(out_dir / f"{manifest.command}.manifest.json")
    return 0


def cmd_spectrum(args, parser):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.input:
        X = read_points_csv(args.input)
    else:
        X = sample_uniform_cube(args.n, args.d, subseed(args.seed, "covariates"))
    d = X.shape[1]
    bandwidth = np.sqrt(d / 2.0) if args.bandwidth == "auto" else float(args.bandwidth)
    spec = kernel_from_name(args.kernel, bandwidth)
    eigen = eigendecompose(kernel_matrix(X, spec), method=args.method)
    manifest = RunManifest(
        command="spectrum",
        seed=args.seed,
        params={
            "n": X.shape[0], "d": d, "kernel": args.kernel,
            "bandwidth": bandwidth, "input": args.input or "", "method": args.method,
        },
        outputs=["eigen.csv"],
        version=__version__,
    )
    meta = dict(manifest.header_metadata())
    meta.update(schema="eigen", seed=args.seed, kernel=args.kernel, bandwidth=bandwidth)
    write_eigen_csv(out / "eigen.csv", eigen, metadata=meta)
    return _finish(manifest, out)


def cmd_mse(args, parser):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eigvals, scores_sq, n, provenance = _spectrum_source(args, parser)
    r = _r_value(args.r, n)
    report = exact_mse_from_squares(eigvals, scores_sq, r, args.lam, args.sigma, n)
    manifest = RunManifest(
        command="mse",
        seed=args.seed,
        params={"lambda": args.lam, "r": r, "sigma": args.sigma, "n": n,
                "source": provenance, "check_mc": bool(args.check_mc),
                "trials": args.trials},
        outputs=["mse.csv"],
        version=__version__,
    )
    meta = dict(manifest.header_metadata())
    meta.update(schema="mse", source=provenance, seed=args.seed)
    columns = list(MSE_REPORT_COLUMNS)
    row = list(report.csv_row())
    ok = True
    if args.check_mc:
        estimate, std_error = monte_carlo_mse(
            eigvals, np.sqrt(scores_sq), r, args.lam, args.sigma, n,
            trials=args.trials, seed=subseed(args.seed, "monte-carlo"),
        )
        ok = abs(estimate - report.total) <= 3.0 * std_error or std_error == 0.0
        columns += ["mc_estimate", "mc_std_error", "mc_pass"]
        row += [estimate, std_error, ok]
        print(f"monte-carlo check: {'PASS' if ok else 'FAIL'} "
              f"(exact {report.total:.6g}, estimate {estimate:.6g}, 3*se {3 * std_error:.3g})")
    write_table_csv(out / "mse.csv", meta, columns, [tuple(row)])
    _finish(manifest, out)
    return 0 if ok else 1


def cmd_curve(args, parser):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eigvals, scores_sq, n, provenance = _spectrum_source(args, parser)
    scores = np.sqrt(scores_sq)
    manifest = RunManifest(
        command="curve", seed=args.seed,
        params={"axis": args.axis, "n": n, "source": provenance},
        outputs=["curve.csv"], version=__version__,
    )
    meta = dict(manifest.header_metadata())
    meta.update(n=n, source=provenance, seed=args.seed)
    if args.axis == "lambda":
        if args.r is None:
            parser.error("--axis lambda requires --r")
        grid = _parse_grid(args.lambda_grid, "--lambda-grid")
        table = lambda_curve(eigvals, scores, _r_value(args.r, n), grid,
                             _parse_floats(args.sigmas), n, metadata=meta)
    else:
        lo, hi = (int(v) for v in args.r_range.split(":"))
        table = r_curve(eigvals, scores, args.lam, range(lo, hi + 1),
                        _parse_floats(args.sigma_over_sqrtn), n, metadata=meta)
    write_curve_csv(out / "curve.csv", table)
    return _finish(manifest, out)


def _parse_axis(text):
    # NAME:LO:HI:COUNT[:log|lin]
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise SystemExit(f"error: axis must be NAME:LO:HI:COUNT[:log|lin], got '{text}'")
    name, lo, hi, count = parts[0], float(parts[1]), float(parts[2]), int(parts[3])
    scale = parts[4] if len(parts) == 5 else "lin"
    if count == 1:
        values = np.array([lo])
    elif scale == "log":
        values = np.logspace(np.log10(lo), np.log10(hi), count)
    else:
        values = np.linspace(lo, hi, count)
    return name, values


def cmd_surface(args, parser):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eigvals, scores_sq, n, provenance = _spectrum_source(args, parser)
    scores = np.sqrt(scores_sq)
    axis1 = _parse_axis(args.axis1)
    axis2 = _parse_axis(args.axis2)
    fixed = {}
    if args.lam is not None:
        fixed["lambda"] = args.lam
    if args.r is not None:
        fixed["r"] = _r_value(args.r, n)
    if args.sigma is not None:
        fixed["sigma"] = args.sigma
    manifest = RunManifest(
        command="surface", seed=args.seed,
        params={"axis1": args.axis1, "axis2": args.axis2, "n": n,
                "source": provenance, "fixed": {k: str(v) for k, v in fixed.items()}},
        outputs=["surface.csv"], version=__version__,
    )
    meta = dict(manifest.header_metadata())
    meta.update(n=n, source=provenance, seed=args.seed)
    threads = _thread_count(args.threads)
    table = surface(eigvals, scores, n, axis1, axis2, fixed=fixed,
                    metadata=meta, threads=threads)
    write_surface_csv(out / "surface.csv", table)
    return _finish(manifest, out)


def cmd_rates(args, parser):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.preset == "paper":
        cfg = PRESET_RATES
        alpha, gamma, sigma = cfg["alpha"], cfg["gamma"], cfg["sigma"]
        n_grid = cfg["n_grid"]
        grid = log_lambda_grid(cfg["lambda_lo"], cfg["lambda_hi"], cfg["lambda_count"])
    else:
        if args.alpha is None or args.gamma is None:
            parser.error("rates requires --alpha and --gamma (or --preset paper)")
        alpha, gamma, sigma = args.alpha, args.gamma, args.sigma
        n_grid = _parse_ints(args.n_grid)
        grid = _parse_grid(args.lambda_grid, "--lambda-grid")
    manifest = RunManifest(
        command="rates", seed=args.seed,
        params={"alpha": alpha, "gamma": gamma, "sigma": sigma,
                "n_grid": n_grid, "drop_smallest": args.drop_smallest,
                "gap_alphas": args.gap_alphas or "", "gap_sigmas": args.gap_sigmas or ""},
        outputs=["rates.csv"], version=__version__,
    )
    meta = dict(manifest.header_metadata())
    meta["seed"] = args.seed
    study = rate_study(alpha, gamma, n_grid, sigma, grid,
                       drop_smallest=args.drop_smallest, metadata=meta)
    write_rate_study_csv(out / "rates.csv", study)
    print(f"slope_tkrr {study.slope_tkrr:.6f}  slope_full {study.slope_full:.6f}")
    if args.gap_alphas:
        gap = log_mse_gap(_parse_floats(args.gap_alphas), gamma,
                          _parse_floats(args.gap_sigmas or str(sigma)),
                          n_grid, grid, metadata=meta)
        write_gap_csv(out / "gap.csv", gap)
        manifest.outputs.append("gap.csv")
    return _finish(manifest, out)


def _thread_count(value):
    if value == "auto":
        import os

        return os.cpu_count() or 1
    return max(1, int(value))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tkrr",
        description="Truncated kernel ridge regression: spectra, risk, and rate experiments",
    )
    parser.add_argument("--version", action="version", version=f"tkrr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", default="1", help="worker threads for grids (k or 'auto')")

    p = sub.add_parser("spectrum", parents=[common],
                       help="sample covariates, build the kernel matrix, eigendecompose")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--kernel", default="gaussian")
    p.add_argument("--bandwidth", default="auto",
                   help="kernel bandwidth, or 'auto' for sqrt(d/2)")
    p.add_argument("--input", help="read covariates from headerless CSV instead of sampling")
    p.add_argument("--method", default="lapack", choices=["lapack", "jacobi"])
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("mse", parents=[common], help="one exact-MSE report row")
    _add_source_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--r", required=True, help="truncation level (integer or 'n')")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--check-mc", action="store_true",
                   help="cross-check against the Monte Carlo oracle")
    p.add_argument("--trials", type=int, default=100000)
    p.set_defaults(func=cmd_mse)

    p = sub.add_parser("curve", parents=[common], help="regularization curve table")
    _add_source_flags(p)
    p.add_argument("--axis", choices=["lambda", "r"], required=True)
    p.add_argument("--r", help="truncation level for --axis lambda (integer or 'n')")
    p.add_argument("--lambda-grid", default="1e-6:1e2:200", metavar="LO:HI:COUNT")
    p.add_argument("--sigmas", default="0,0.05,0.1,0.2,0.5,1")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-4,
                   help="ridge level for --axis r")
    p.add_argument("--r-range", default=None, metavar="LO:HI")
    p.add_argument("--sigma-over-sqrtn", default="0,0.01,0.02,0.05,0.1")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("surface", parents=[common], help="MSE total over a 2-D grid")
    _add_source_flags(p)
    p.add_argument("--axis1", required=True, metavar="NAME:LO:HI:COUNT[:log|lin]")
    p.add_argument("--axis2", required=True, metavar="NAME:LO:HI:COUNT[:log|lin]")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--r", help="integer or 'n'")
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("rates", parents=[common],
                       help="truncated vs full minimum-MSE rate study")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n-grid", default="256,512,1024,2048,4096,8192,16384")
    p.add_argument("--lambda-grid", default="1e-10:1e2:1000", metavar="LO:HI:COUNT")
    p.add_argument("--drop-smallest", type=int, default=0)
    p.add_argument("--preset", choices=["paper"],
                   help="'paper': alpha=1 gamma=10 sigma=1, n=2^8..2^14, 1000-point grid")
    p.add_argument("--gap-alphas", help="also write the log-MSE gap table for these alphas")
    p.add_argument("--gap-sigmas", help="noise levels for the gap table")
    p.set_defaults(func=cmd_rates)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
