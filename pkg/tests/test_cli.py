import json
import math
import subprocess
import sys

import numpy as np
import pytest

from spartan_ts import cli
from spartan_ts.inference import GappySeries, detrend
from spartan_ts.io import parse_series
from spartan_ts.model import CovarianceSpec, SpartanParams
from spartan_ts.predict import kwp_fill, sp_explicit


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


@pytest.fixture
def series(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "simulate", "--model", "gaussian", "--sigma", 10, "--b", 3,
                     "--n", 400, "--mean", 50, "--seed", 7, "-o", path)
    assert code == 0
    return path


def test_simulate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        run(capsys, "simulate", "--model", "gaussian", "--sigma", 10, "--b", 3,
            "--n", 1000, "--seed", 7, "-o", p)
    assert a.read_bytes() == b.read_bytes()
    _, out, _ = run(capsys, "simulate", "--model", "spartan", "--eta0", 1, "--eta1", -1,
                    "--xi", 2, "--n", 50, "--alpha", 0.5, "--t0", 10)
    sf = parse_series(out.splitlines())
    assert sf.alpha == 0.5 and sf.times[0] == 10.0


def test_infer_reports_fields_and_round_trip(series, capsys):
    code, out, _ = run(capsys, "infer", series)
    r = report(out)
    assert code == 0
    assert set(r) >= {"method", "eta0", "eta1", "xi", "iterations", "elapsed", "objective"}
    assert float(r["objective"]) <= 1e-10
    from spartan_ts.inference import fit_mmom
    from spartan_ts.io import read_series
    lib = fit_mmom(detrend(read_series(series)))
    assert float(r["eta1"]) == lib.params.eta1 and float(r["xi"]) == lib.params.xi


def test_infer_mle_on_353_points(tmp_path, capsys):
    path = tmp_path / "a.csv"
    run(capsys, "simulate", "--model", "gaussian", "--b", 5, "--n", 353, "--seed", 1, "-o", path)
    code, out, _ = run(capsys, "infer", path, "--method", "mle", "--no-detrend")
    r = report(out)
    assert code == 0 and r["method"] == "mle" and 10 <= int(r["iterations"]) < 2000
    assert float(r["mean_offset"]) == 0.0


def test_infer_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,value\n0,1\n1,2\n2.5,3\n3,4\n")
    code, _, err = run(capsys, "infer", bad)
    assert code == 2 and "line 4" in err
    few = tmp_path / "few.csv"
    few.write_text("0,1\n1,\n2,\n3,4\n4,5\n")
    code, _, err = run(capsys, "infer", few)
    assert code == 3
    code, _, _ = run(capsys, "infer", tmp_path / "missing.csv")
    assert code == 2


def test_infer_convergence_failure_reports_best_point(series, capsys, monkeypatch):
    from spartan_ts import inference
    real = inference.fit_mmom
    monkeypatch.setattr(cli, "fit_mmom", lambda x: real(x, max_iter=1))
    code, _, err = run(capsys, "infer", series)
    assert code == 3 and "best point" in err and "eta1" in err


def test_fill_single_gap_closed_form(tmp_path, capsys):
    v = [0.3, -1.0, 2.0, 0.5, None, -0.7, 1.1, 0.4, 2.2]
    path = tmp_path / "g.csv"
    path.write_text("time,value\n" + "".join(f"{i},{'' if x is None else x}\n" for i, x in enumerate(v)))
    code, out, _ = run(capsys, "fill", path, "--eta0", 1, "--eta1", 1, "--xi", 1, "--no-detrend")
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()]
    assert rows[0] == ["time", "value", "source"]
    ref = (5 * (v[3] + v[5]) - (v[2] + v[6])) / 9
    assert float(rows[5][1]) == pytest.approx(ref, rel=1e-14) and rows[5][2] == "predicted"
    x = GappySeries.from_values([math.nan if a is None else a for a in v])
    assert float(rows[5][1]) == pytest.approx(sp_explicit(x, SpartanParams(1, 1, 1))[0], rel=1e-14)


def test_fill_observed_rows_byte_identical(tmp_path, capsys):
    path = tmp_path / "g.csv"
    lines = ["time,value"] + [f"{i}.0,{50 + np.sin(i):.3f}" if i % 5 else f"{i}.0,NaN" for i in range(60)]
    path.write_text("\n".join(lines) + "\n")
    for predictor in ("sp", "kwp"):
        _, out, _ = run(capsys, "fill", path, "--predictor", predictor)
        got = out.splitlines()
        for src, dst in zip(lines[1:], got[1:]):
            if not src.endswith("NaN"):
                assert dst == src + ",observed"
            else:
                assert dst.endswith(",predicted") and "NaN" not in dst


def test_fill_gapless_is_noop(series, capsys):
    _, out, _ = run(capsys, "fill", series)
    src = series.read_text().splitlines()
    got = out.splitlines()
    assert [g.rsplit(",", 1)[0] for g in got[1:]] == src[1:]


def test_fill_kwp_matches_library(tmp_path, capsys):
    path = tmp_path / "g.csv"
    v = 50 + np.cumsum(np.random.default_rng(0).normal(size=80)) * 0.3
    v[[4, 5, 40, 79]] = np.nan
    path.write_text("time,value\n" + "".join(f"{i},{float(x)!r}\n" for i, x in enumerate(v)))
    _, out, _ = run(capsys, "fill", path, "--predictor", "kwp", "--eta0", 2, "--eta1", -1, "--xi", 3)
    got = parse_series(out.splitlines()).values
    x = detrend(GappySeries.from_values(v))
    lib = kwp_fill(x, CovarianceSpec.from_spartan(SpartanParams(2, -1, 3))).values
    np.testing.assert_allclose(got, lib, rtol=1e-15)
    _, out, _ = run(capsys, "fill", path, "--predictor", "kwp", "--cov-kind", "exponential",
                    "--sigma", 1, "--b", 4)
    lib = kwp_fill(x, CovarianceSpec.exponential(1, 4)).values
    np.testing.assert_allclose(parse_series(out.splitlines()).values, lib, rtol=1e-15)


def test_fill_bad_params_exit_2(series, capsys):
    code, _, _ = run(capsys, "fill", series, "--eta0", 1, "--eta1", -3, "--xi", 1)
    assert code == 2
    code, _, _ = run(capsys, "fill", series, "--eta0", 1)
    assert code == 2


def test_acf_exponential(tmp_path, capsys):
    path = tmp_path / "e.csv"
    run(capsys, "simulate", "--model", "exponential", "--sigma", 1, "--b", 1, "--n", 5000, "--seed", 3, "-o", path)
    code, out, _ = run(capsys, "acf", path, "--max-lag", 20, "--spartan", "mmom")
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()]
    assert rows[0] == ["lag", "empirical", "pairs", "mmom"]
    rho = np.array([float(r[1]) for r in rows[1:]])
    assert rho[0] == 1.0 and len(rho) == 21
    np.testing.assert_allclose(rho, np.exp(-np.arange(21.0)), atol=0.06)
    assert float(rows[1][3]) == 1.0


def test_surface_output(series, capsys):
    code, out, _ = run(capsys, "surface", series, "--kind", "dm", "--eta1=-2.5:3:5", "--xi=0.5:4:4")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# optimum eta1=")
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 20
    for e, _, v, ok in rows:
        assert (ok == "0") == (float(e) <= -2) and (v == "NaN") == (ok == "0")
    code, _, _ = run(capsys, "surface", series, "--eta1", "1:2")
    assert code == 2


def _write_plan(tmp_path, **kw):
    plan = dict(protocol="interpolation", model={"kind": "exponential", "sigma": 10, "b": 5},
                n=300, replicates=3, seed=2)
    plan.update(kw)
    path = tmp_path / "p.plan"
    path.write_text(json.dumps(plan))
    return path


def test_bench_deterministic_with_timings_sidecar(tmp_path, capsys):
    plan = _write_plan(tmp_path)
    for name in ("a.json", "b.json"):
        assert run(capsys, "bench", "--plan", plan, "-o", tmp_path / name)[0] == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert "interpolation" in json.loads((tmp_path / "a.json.timings.json").read_text())
    data = json.loads((tmp_path / "a.json").read_text())
    cats = data["predictors"]["sp"]["categories"]
    assert len(cats) == 9 and "total" in data["predictors"]["sp"]
    run(capsys, "bench", "--plan", plan, "--seed", 3, "-o", tmp_path / "c.json")
    assert (tmp_path / "c.json").read_bytes() != (tmp_path / "a.json").read_bytes()


def test_bench_invalid_plan(tmp_path, capsys):
    assert run(capsys, "bench", "--plan", _write_plan(tmp_path, protocol="x"))[0] == 2
    bad = tmp_path / "bad.plan"
    bad.write_text("{not json")
    assert run(capsys, "bench", "--plan", bad)[0] == 2
    bad.write_text("[1, 2]")
    assert run(capsys, "bench", "--plan", bad)[0] == 2


def test_output_dir_environment(tmp_path, capsys, monkeypatch, series):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "out"))
    run(capsys, "infer", series, "-o", "fit.txt")
    assert report((tmp_path / "out" / "fit.txt").read_text())["method"] == "mmom"


def test_console_entry_point(series):
    proc = subprocess.run([sys.executable, "-m", "spartan_ts.cli", "infer", str(series)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "eta1:" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "spartan_ts.cli", "frobnicate"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
