import csv
import json

import numpy as np
import pytest

from kernseg.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from kernseg.geometry import write_points_csv


def test_run_writes_artifacts(tmp_path, capsys):
    assert main(["run", "--case", "f1", "--out", str(tmp_path), "--workers", "1"]) == EXIT_OK
    assert "J=2" in capsys.readouterr().out
    for name in ("report.json", "classes.csv", "sigma.csv", "grid_errors.csv",
                 "seeds.csv", "blowup_trace.jsonl"):
        assert (tmp_path / name).stat().st_size > 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["J"] == 2
    errors = report["errors"]
    for key in ("linf_safe_segmented", "linf_segmented", "linf_safe_global", "linf_global"):
        assert errors[key] > 0


def test_dump_sigma_to_stdout(capsys):
    assert main(["dump", "sigma", "--case", "f2", "--workers", "1"]) == EXIT_OK
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["id", "sigma", "good"]
    sig = [float(r[1]) for r in rows[1:]]
    assert sig == sorted(sig)


def test_dump_classes_and_trace(tmp_path):
    out = tmp_path / "classes.csv"
    assert main(["dump", "classes", "--case", "f4", "-o", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 900 and set(rows[0]) == {"id", "x", "y", "class", "provenance"}
    trace = tmp_path / "trace.jsonl"
    assert main(["dump", "blowup-trace", "--case", "f4", "-o", str(trace)]) == EXIT_OK
    lines = trace.read_text().splitlines()
    assert lines and all("point" in json.loads(l) for l in lines)


def test_dump_case(tmp_path):
    out = tmp_path / "f3.csv"
    assert main(["dump-case", "--case", "f3", "--seed", "4", "-o", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 900 and set(rows[0]) == {"x", "y", "f", "true_class"}


def test_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--case", "f1", "--n", "10,12", "--factors", "2", "--N", "400",
                 "--target-q", "0.05", "-o", str(out)])
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["n_neighbors"] for r in rows] == ["10", "12"]
    assert all(r["status"] == "ok" for r in rows)


def test_run_with_data_file(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.random((150, 2))
    f = np.where(x[:, 0] > 0.5, 1.0, 0.0) + x[:, 1]
    data = tmp_path / "pts.csv"
    write_points_csv(data, x, f)
    assert main(["run", "--data", str(data), "--out", str(tmp_path / "o")]) == EXIT_OK
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["errors"]["linf_safe_segmented"] is None
    assert not (tmp_path / "o" / "grid_errors.csv").exists()


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", "--case", "f2", "--seed", "3", "--out", str(d)]) == EXIT_OK
    for name in ("classes.csv", "report.json", "sigma.csv", "grid_errors.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"delta": -1}')
    assert main(["run", "--case", "f1", "--config", str(cfg)]) == EXIT_CONFIG
    assert "delta" in capsys.readouterr().err
    assert main(["run", "--data", str(tmp_path / "missing.csv")]) == EXIT_CONFIG


def test_unknown_case_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["run", "--case", "f9"])
    assert err.value.code == EXIT_CONFIG


def test_numeric_failure_exit_code(tmp_path, capsys):
    data = tmp_path / "pts.csv"
    data.write_text("x,y,f\n0,0,1\n1,0,inf\n0,1,0\n")
    assert main(["run", "--data", str(data), "--n-neighbors", "2"]) == EXIT_NUMERIC
    assert "locality" in capsys.readouterr().err
