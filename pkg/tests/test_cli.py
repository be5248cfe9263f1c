import json
import logging

import numpy as np
import pandas as pd
import pytest

from spicereg import __version__
from spicereg.main import main


@pytest.fixture
def noiseless_csv(write_rows):
    rng = np.random.default_rng(5)
    X = rng.standard_normal((100, 3))
    y = 1.0 + 2.0 * X[:, 0]
    return write_rows("noiseless.csv", np.column_stack([X, y]), header="x1,x2,x3,y")


@pytest.fixture
def noisy_rows():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((60, 2))
    y = 0.5 + X @ np.array([1.0, -2.0]) + 0.3 * rng.standard_normal(60)
    return np.column_stack([X, y])


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize("argv", [[], ["fit"], ["predict", "data.csv"], ["fit", "data.csv", "--out", "m.json", "--cycles", "x"]])
def test_usage_errors_exit_with_one(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_fit_then_predict_on_noiseless_rows(tmp_path, noiseless_csv, capsys):
    model = tmp_path / "model.json"
    predictions = tmp_path / "pred.csv"

    assert main(["fit", str(noiseless_csv), "--out", str(model), "--converge"]) == 0
    summary = capsys.readouterr().out
    assert summary.startswith("n=100 nonzero=")

    assert main(["predict", str(noiseless_csv), "--model", str(model), "--out", str(predictions)]) == 0
    frame = pd.read_csv(predictions)
    assert list(frame.columns) == ["y_hat", "y", "residual"]
    assert frame["residual"].abs().max() < 1e-6


def test_predict_without_targets_writes_only_predictions(tmp_path, write_rows, noisy_rows, capsys):
    model = tmp_path / "model.json"
    assert main(["fit", str(write_rows("train.csv", noisy_rows)), "--out", str(model)]) == 0
    capsys.readouterr()

    query = write_rows("query.csv", noisy_rows[:5, :2])
    assert main(["predict", str(query), "--model", str(model)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "y_hat"
    assert len(lines) == 6


def test_continuing_a_saved_model_matches_one_pass(tmp_path, write_rows, noisy_rows):
    first, rest = tmp_path / "first.json", tmp_path / "rest.json"
    whole = tmp_path / "whole.json"

    assert main(["fit", str(write_rows("a.csv", noisy_rows[:50])), "--out", str(first)]) == 0
    assert main(["fit", str(write_rows("b.csv", noisy_rows[50:])), "--model", str(first), "--out", str(rest)]) == 0
    assert main(["fit", str(write_rows("all.csv", noisy_rows)), "--out", str(whole)]) == 0
    assert rest.read_text() == whole.read_text()


def test_empty_input_exits_with_two(tmp_path, write_rows, caplog):
    with caplog.at_level(logging.ERROR):
        code = main(["fit", str(write_rows("empty.csv", [])), "--out", str(tmp_path / "m.json")])
    assert code == 2
    assert "no rows" in caplog.text
    assert not (tmp_path / "m.json").exists()


def test_bad_row_reports_line_and_exits_with_two(tmp_path, write_rows, caplog):
    path = write_rows("bad.csv", ["1,2,3", "4,oops,6"], header="a,b,y")
    with caplog.at_level(logging.ERROR):
        code = main(["fit", str(path), "--out", str(tmp_path / "m.json")])
    assert code == 2
    assert "line 3" in caplog.text


def test_unknown_model_version_exits_with_two(tmp_path, write_rows, caplog):
    model = tmp_path / "future.json"
    model.write_text(json.dumps({"version": 2}), encoding="utf-8")
    with caplog.at_level(logging.ERROR):
        code = main(["predict", str(write_rows("q.csv", [[1.0, 2.0]])), "--model", str(model)])
    assert code == 2
    assert "unsupported model version" in caplog.text


def test_invalid_feature_configuration_exits_with_one(tmp_path, write_rows, noisy_rows, caplog):
    with caplog.at_level(logging.ERROR):
        code = main(["fit", str(write_rows("t.csv", noisy_rows)), "--out", str(tmp_path / "m.json"),
                     "--features", "laplace-tensor"])
    assert code == 1
    assert "invalid configuration" in caplog.text


def test_laplace_features_from_flags(tmp_path, write_rows, noisy_rows, capsys):
    model = tmp_path / "m.json"
    code = main(["fit", str(write_rows("t.csv", noisy_rows)), "--out", str(model),
                 "--features", "laplace-additive", "--m", "4", "--half-widths", "4"])
    assert code == 0
    document = json.loads(model.read_text())
    assert document["feature_map"]["half_widths"] == [4.0, 4.0]
    assert len(document["w"]) == 1 + 2 * 4


def test_conformal_intervals(tmp_path, write_rows, noisy_rows, capsys):
    out = tmp_path / "intervals.csv"
    code = main(["conformal", str(write_rows("t.csv", noisy_rows)), "--kappa-cov", "0.8",
                 "--seed", "2", "--out", str(out)])
    assert code == 0

    summary = json.loads(capsys.readouterr().out)
    assert summary["rows"] == 60 and summary["kappa_cov"] == 0.8
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["y_hat", "lower", "upper"]
    assert np.allclose(frame["upper"] - frame["lower"], summary["mean_length"])


def test_conformal_with_too_few_rows_is_unbounded(write_rows, caplog):
    rows = [[0.1, 1.0], [0.2, 2.0], [0.3, 2.5], [0.4, 4.0]]
    with caplog.at_level(logging.WARNING):
        code = main(["conformal", str(write_rows("tiny.csv", rows)), "--kappa-cov", "0.99"])
    assert code == 2
    assert "unbounded" in caplog.text


def test_datagen_to_file_and_stdout(tmp_path, capsys):
    out = tmp_path / "gen.csv"
    args = ["datagen", "--rows", "20", "--d", "5", "--support", "1,2", "--rank", "3"]
    assert main(args + ["--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert frame.shape == (20, 6)
    assert list(frame.columns)[-1] == "y"

    assert main(args + ["--no-header"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 20
    assert np.allclose(np.array([line.split(",") for line in lines], dtype=float), frame.to_numpy())


def test_datagen_rejects_bad_support(capsys):
    assert main(["datagen", "--rows", "5", "--d", "3", "--support", "4"]) == 1


def test_datagen_tail_fraction_flag(tmp_path):
    out = tmp_path / "flat.csv"
    args = ["datagen", "--rows", "30", "--d", "6", "--support", "1", "--rank", "2", "--tail-fraction", "0"]
    assert main(args + ["--out", str(out)]) == 0
    X = pd.read_csv(out).to_numpy()[:, :-1]
    assert np.linalg.matrix_rank(X) == 2


def test_verify_reports_no_violations(capsys):
    assert main(["verify", "--seeds", "3", "--inflation-trials", "500"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["instances"] == 3
    assert report["lasso_violations"] == 0 and report["spice_violations"] == 0
    assert report["inflation"]["passed"]
    assert "reports" not in report


def test_verify_can_print_every_check(capsys):
    assert main(["verify", "--seeds", "2", "--inflation-trials", "0", "--all-checks"]) == 0
    report = json.loads(capsys.readouterr().out)
    # 2 random instances plus the 5 noiseless ones, each with a LASSO and a SPICE check
    assert len(report["reports"]) == 14
    assert {r["check"] for r in report["reports"]} == {"lasso", "spice"}
    assert all("measured" in r and "bound" in r for r in report["reports"])


def test_verify_fills_the_premise_quota(capsys):
    assert main(["verify", "--seeds", "2", "--inflation-trials", "0", "--min-premises", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["spice_premise_count"] >= 5
    assert report["extra_instances"] > 0


def test_verify_rejects_oversized_oracle(caplog):
    with caplog.at_level(logging.ERROR):
        assert main(["verify", "--seeds", "1", "--p", "20", "--inflation-trials", "0"]) == 2
    assert "best-subset oracle" in caplog.text


def test_experiment_writes_report(tmp_path, capsys):
    out = tmp_path / "t1"
    code = main(["experiment", "table1", "--replications", "1", "--n-grid", "30",
                 "--predictors", "spice,ridge", "--n-test", "50", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out.startswith("Risk normalized by noise level [dB]")
    for name in ("report.json", "cells.csv", "table.txt", "residuals.svg"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["replications"] == 1
    assert len(report["cells"]) == 2
