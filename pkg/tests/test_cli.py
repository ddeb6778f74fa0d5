import numpy as np
import pytest

from tkrr.cli import main, subseed
from tkrr.io import read_table_csv
from tkrr.spectral import read_eigen_csv


def run(argv):
    return main([str(a) for a in argv])


def data_rows(path):
    return [
        line
        for line in path.read_text().splitlines()
        if line and not line.startswith("#")
    ]


def test_subseed_is_stable_and_component_dependent():
    assert subseed(7, "covariates") == subseed(7, "covariates")
    assert subseed(7, "covariates") != subseed(7, "alignment")
    assert subseed(7, "covariates") != subseed(8, "covariates")


def test_spectrum_writes_full_eigensystem(tmp_path):
    code = run(
        ["spectrum", "--n", 200, "--d", 4, "--kernel", "gaussian",
         "--bandwidth", "auto", "--seed", 7, "--out", tmp_path]
    )
    assert code == 0
    eigen, meta = read_eigen_csv(tmp_path / "eigen.csv")
    assert eigen.n == 200
    assert eigen.eigvals[0] > 0
    assert "manifest" in meta
    assert (tmp_path / "spectrum.manifest.json").exists()


def test_spectrum_single_point(tmp_path):
    assert run(["spectrum", "--n", 1, "--d", 3, "--seed", 0, "--out", tmp_path]) == 0
    eigen, _ = read_eigen_csv(tmp_path / "eigen.csv")
    assert eigen.eigvals.tolist() == [1.0]


def test_spectrum_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(["spectrum", "--n", 30, "--d", 2, "--seed", 5, "--out", out]) == 0
    assert (a / "eigen.csv").read_bytes() == (b / "eigen.csv").read_bytes()
    assert (a / "spectrum.manifest.json").read_bytes() == (
        b / "spectrum.manifest.json"
    ).read_bytes()


def test_spectrum_from_input_csv(tmp_path):
    from tkrr.kernels import write_points_csv

    rng = np.random.default_rng(3)
    X = rng.random((12, 2))
    write_points_csv(tmp_path / "points.csv", X)
    code = run(
        ["spectrum", "--input", tmp_path / "points.csv", "--bandwidth", 0.9,
         "--seed", 1, "--out", tmp_path]
    )
    assert code == 0
    eigen, _ = read_eigen_csv(tmp_path / "eigen.csv")
    assert eigen.n == 12


def test_spectrum_jacobi_backend_matches(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["spectrum", "--n", 12, "--d", 2, "--seed", 4, "--out", a])
    run(["spectrum", "--n", 12, "--d", 2, "--seed", 4, "--out", b, "--method", "jacobi"])
    ea, _ = read_eigen_csv(a / "eigen.csv")
    eb, _ = read_eigen_csv(b / "eigen.csv")
    assert np.abs(ea.eigvals - eb.eigvals).max() <= 1e-9 * ea.eigvals[0]


def test_mse_interpolation_row(tmp_path):
    code = run(
        ["mse", "--mu-alpha", 1, "--n", 16, "--gamma", 1, "--lambda", 0,
         "--r", "n", "--sigma", 1, "--seed", 0, "--out", tmp_path]
    )
    assert code == 0
    meta, header, rows = read_table_csv(tmp_path / "mse.csv")
    total = float(rows[0][header.index("total")])
    assert total == 1.0


def test_mse_check_mc_passes(tmp_path, capsys):
    code = run(
        ["mse", "--mu-alpha", 1, "--n", 32, "--band", "4:2", "--lambda", 0.1,
         "--r", 10, "--sigma", 0.5, "--check-mc", "--trials", 50000,
         "--seed", 3, "--out", tmp_path]
    )
    assert code == 0
    assert "PASS" in capsys.readouterr().out
    meta, header, rows = read_table_csv(tmp_path / "mse.csv")
    assert "mc_estimate" in header and rows[0][header.index("mc_pass")] == "true"


def test_mse_requires_r(tmp_path):
    with pytest.raises(SystemExit) as err:
        run(["mse", "--mu-alpha", 1, "--n", 8, "--gamma", 1, "--lambda", 0.1,
             "--sigma", 0, "--out", tmp_path])
    assert err.value.code != 0


def test_mse_requires_spectrum_source(tmp_path):
    with pytest.raises(SystemExit):
        run(["mse", "--lambda", 0.1, "--r", 2, "--sigma", 0, "--out", tmp_path])


def test_curve_lambda_axis(tmp_path):
    code = run(
        ["curve", "--axis", "lambda", "--mu-alpha", 1, "--n", 24, "--band", "6:4",
         "--r", 10, "--lambda-grid", "1e-4:1e1:12", "--sigmas", "0,0.5",
         "--seed", 2, "--out", tmp_path]
    )
    assert code == 0
    meta, header, rows = read_table_csv(tmp_path / "curve.csv")
    assert meta["axis"] == "lambda"
    assert len(rows) == 24
    totals = [float(r[header.index("total")]) for r in rows]
    parts = [
        float(r[header.index("bias_reg")])
        + float(r[header.index("bias_tail")])
        + float(r[header.index("variance")])
        for r in rows
    ]
    assert totals == pytest.approx(parts, rel=1e-12)


def test_curve_r_axis_two_bands_rises_between(tmp_path):
    code = run(
        ["curve", "--axis", "r", "--eigen", _gaussian_eigen_csv(tmp_path),
         "--bands", "10:10,10:60", "--lambda", 1e-4, "--r-range", "1:200",
         "--sigma-over-sqrtn", "0.05", "--seed", 9, "--out", tmp_path]
    )
    assert code == 0
    meta, header, rows = read_table_csv(tmp_path / "curve.csv")
    totals = np.array([float(r[header.index("total")]) for r in rows])
    gap = totals[20:60]  # r = 21 .. 60
    assert np.all(np.diff(gap) > 0)
    assert totals[69] < totals[59]


def _gaussian_eigen_csv(tmp_path):
    out = tmp_path / "spectrum_out"
    assert run(["spectrum", "--n", 200, "--d", 4, "--seed", 7, "--out", out]) == 0
    return out / "eigen.csv"


def test_surface_single_cell(tmp_path):
    code = run(
        ["surface", "--mu-alpha", 1, "--n", 16, "--gamma", 2,
         "--axis1", "sigma:0.5:0.5:1", "--axis2", "lambda:0.1:0.1:1",
         "--r", 8, "--seed", 0, "--out", tmp_path]
    )
    assert code == 0
    meta, header, rows = read_table_csv(tmp_path / "surface.csv")
    assert len(rows) == 1
    assert header == ["sigma", "lambda", "total"]


def test_surface_grid_with_threads(tmp_path):
    code = run(
        ["surface", "--mu-alpha", 1, "--n", 20, "--band", "4:2",
         "--axis1", "sigma:0:1:5", "--axis2", "lambda:1e-4:1e0:6:log",
         "--r", "n", "--seed", 1, "--threads", 4, "--out", tmp_path]
    )
    assert code == 0
    _, _, rows = read_table_csv(tmp_path / "surface.csv")
    assert len(rows) == 30


def test_rates_small_run(tmp_path, capsys):
    code = run(
        ["rates", "--alpha", 1, "--gamma", 5, "--sigma", 1,
         "--n-grid", "128,256,512,1024", "--lambda-grid", "1e-8:1e1:120",
         "--seed", 0, "--out", tmp_path]
    )
    assert code == 0
    meta, header, rows = read_table_csv(tmp_path / "rates.csv")
    assert "slope_tkrr" in meta and "slope_full" in meta
    assert len(rows) == 4
    assert "slope_tkrr" in capsys.readouterr().out


def test_rates_preset_runs_appendix_configuration(tmp_path):
    code = run(["rates", "--preset", "paper", "--seed", 0, "--out", tmp_path])
    assert code == 0
    meta, header, rows = read_table_csv(tmp_path / "rates.csv")
    assert len(rows) == 7
    slope_tkrr = float(meta["slope_tkrr"])
    slope_full = float(meta["slope_full"])
    assert slope_tkrr < slope_full


def test_rates_with_gap_table(tmp_path):
    code = run(
        ["rates", "--alpha", 1, "--gamma", 5, "--n-grid", "128,256,512",
         "--lambda-grid", "1e-8:1e1:80", "--gap-alphas", "1,2",
         "--gap-sigmas", "1", "--seed", 0, "--out", tmp_path]
    )
    assert code == 0
    meta, header, rows = read_table_csv(tmp_path / "gap.csv")
    assert header == ["alpha", "sigma", "n", "log_min_full", "log_min_tkrr", "gap"]
    assert len(rows) == 6


def test_unreadable_input_fails_with_path(tmp_path, capsys):
    code = run(["spectrum", "--input", tmp_path / "missing.csv", "--out", tmp_path])
    assert code == 1
    assert "missing.csv" in capsys.readouterr().err
