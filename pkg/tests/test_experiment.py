import json
import logging
import math

import numpy as np
import pytest

from spicereg.errors import DataError
from spicereg.models import ExperimentConfig, ExperimentId, PredictorName, SparseStudentTConfig
from spicereg.services.experiment_service import (
    TIMING_NOTE,
    fit_timing_line,
    format_table,
    load_presets,
    preset,
    run_experiment,
    write_report,
)

SMALL_GENERATOR = SparseStudentTConfig(d=10, support=[1, 5], seed=0)


def small(experiment, **overrides):
    values = {"replications": 2, "n_grid": [30, 40], "n_test": 200, "folds": 5,
              "generator": SMALL_GENERATOR}
    values.update(overrides)
    return preset(experiment, **values)


def test_presets_cover_every_experiment():
    presets = load_presets()
    assert set(presets) == {e.value for e in ExperimentId}
    assert presets["table1"].generator.d == 100
    assert presets["table2"].kappa_cov == 0.9
    assert presets["table3-timing"].n_grid == [2000, 4000, 8000]


def test_overrides_replace_preset_values_and_none_is_ignored():
    config = preset(ExperimentId.TABLE1, replications=5, seed=None)
    assert config.replications == 5
    assert config.seed == 0
    assert config.n_grid == [50, 100, 200]


def test_missing_presets_file_falls_back_to_defaults(tmp_path, caplog):
    with caplog.at_level(logging.ERROR):
        config = preset(ExperimentId.TABLE2, data_path=str(tmp_path / "absent.json"))
    assert config == ExperimentConfig(experiment=ExperimentId.TABLE2)
    assert "not found" in caplog.text


def test_invalid_n_grid_is_rejected():
    with pytest.raises(ValueError):
        preset(ExperimentId.TABLE1, n_grid=[100, 50])


def test_risk_table_cells():
    config = small(ExperimentId.TABLE1, predictors=[PredictorName.SPICE, PredictorName.RIDGE, PredictorName.LASSO])
    report, residuals = run_experiment(config)

    assert [(c.n, c.predictor) for c in report.cells] == [
        (n, p) for n in (30, 40) for p in (PredictorName.SPICE, PredictorName.RIDGE, PredictorName.LASSO)
    ]
    for cell in report.cells:
        assert cell.replications == 2
        assert cell.risk > 0
        assert cell.risk_db == pytest.approx(10.0 * math.log10(cell.risk / 4.0))
        assert cell.coverage is None
    assert residuals.shape == (2 * 200,)
    assert report.resolved["p"] == 11
    assert report.timing_fit is None


def test_risks_are_reproducible_and_independent_of_workers():
    config = small(ExperimentId.TABLE1, predictors=[PredictorName.SPICE, PredictorName.RIDGE])
    first, _ = run_experiment(config)
    second, _ = run_experiment(config)
    parallel, _ = run_experiment(config.model_copy(update={"n_jobs": 2}))

    assert second.reproducible_dump() == first.reproducible_dump()
    risks = [c.risk for c in first.cells]
    assert [c.risk for c in parallel.cells] == pytest.approx(risks, rel=1e-12)


def test_cells_record_the_grid_of_every_replication():
    config = small(ExperimentId.TABLE1, predictors=[PredictorName.SPICE, PredictorName.RIDGE], grid_size=4)
    report, _ = run_experiment(config)
    for cell in report.cells:
        if cell.predictor == PredictorName.SPICE:
            assert cell.grids is None
            continue
        assert len(cell.grids) == 2
        assert all(len(grid) == 4 and grid == sorted(grid) for grid in cell.grids)
        assert min(g[0] for g in cell.grids) <= cell.mean_hyperparameter <= max(g[-1] for g in cell.grids)
    assert report.resolved["tail_fraction"] == SMALL_GENERATOR.tail_fraction


def test_interval_table_cells():
    config = small(ExperimentId.TABLE2, predictors=[PredictorName.SPICE, PredictorName.RIDGE],
                   n_grid=[20], replications=3, kappa_cov=0.8)
    report, residuals = run_experiment(config)

    for cell in report.cells:
        assert 0.0 <= cell.coverage <= 1.0
        assert cell.interval_length > 0
        assert cell.risk is None
    assert residuals.shape == (3 * 200,)
    assert "target 0.80" in format_table(report)


def test_timing_runs_sequentially_and_fits_a_line(caplog):
    config = small(ExperimentId.TABLE3_TIMING, predictors=[PredictorName.SPICE],
                   n_grid=[50, 100], replications=1, n_jobs=4)
    with caplog.at_level(logging.WARNING):
        report, residuals = run_experiment(config)

    assert "sequentially" in caplog.text
    assert set(report.timing_fit) == {"spice"}
    assert report.note == TIMING_NOTE
    assert residuals.size == 0
    assert all(c.wall_time > 0 for c in report.cells)


def test_timing_line_through_exact_points():
    fit = fit_timing_line([1, 2, 3], [3.0, 5.0, 7.0])
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)
    with pytest.raises(DataError):
        fit_timing_line([1], [1.0])


def test_report_directory(tmp_path):
    config = small(ExperimentId.TABLE1, predictors=[PredictorName.SPICE], n_grid=[30], replications=1)
    report, residuals = run_experiment(config)
    out = write_report(report, residuals, str(tmp_path / "report"))

    for name in ("report.json", "run.json", "cells.csv", "table.txt", "residuals.svg"):
        assert (out / name).exists()
    assert "generated_at" not in json.loads((out / "report.json").read_text())
    assert json.loads((out / "run.json").read_text())["generated_at"] == report.generated_at
    assert "grids" not in (out / "cells.csv").read_text().splitlines()[0]
    assert (out / "table.txt").read_text().startswith("Risk normalized by noise level [dB]")
    assert (out / "residuals.svg").read_text().lstrip().startswith("<?xml")


def cell_map(report):
    return {(c.n, c.predictor): c for c in report.cells}


@pytest.mark.slow
def test_risk_table_at_full_scale():
    report, _ = run_experiment(preset(ExperimentId.TABLE1, n_jobs=-1))
    cells = cell_map(report)
    expected = {
        PredictorName.SPICE: ([2.54, 1.07, 0.32], 1.0),
        PredictorName.RIDGE: ([10.28, 4.14, 2.73], 1.5),
        PredictorName.LASSO: ([2.85, 1.15, 0.41], 1.0),
    }
    for name, (values, tolerance) in expected.items():
        for n, value in zip((50, 100, 200), values):
            assert cells[(n, name)].risk_db == pytest.approx(value, abs=tolerance)


@pytest.mark.slow
def test_interval_table_at_full_scale():
    report, _ = run_experiment(preset(ExperimentId.TABLE2, n_jobs=-1))
    cells = cell_map(report)
    for cell in report.cells:
        assert 0.88 <= cell.coverage <= 0.92
    for n, length in zip((50, 100, 200), (7.74, 6.33, 5.48)):
        spice = cells[(n, PredictorName.SPICE)]
        assert spice.interval_length == pytest.approx(length, rel=0.15)
        assert spice.interval_length <= cells[(n, PredictorName.RIDGE)].interval_length


@pytest.mark.slow
def test_spice_wall_time_is_linear_in_n():
    report, _ = run_experiment(preset(ExperimentId.TABLE3_TIMING, predictors=[PredictorName.SPICE]))
    assert report.timing_fit["spice"].r_squared >= 0.98
    assert np.all(np.diff([c.wall_time for c in report.cells]) > 0)
