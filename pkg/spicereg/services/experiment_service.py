"""
Monte Carlo studies on the sparse Student-t generator.

table1         out-of-sample risk per (n, predictor), normalized by the noise variance
table2         split-conformal interval length and coverage for n = 2 n'
table3-timing  fit wall time per (n, predictor) and a least-squares line in n

Replication r trains on generator stream [seed, 1, r] and is evaluated on
n_test fresh rows from stream [seed, 2, r]; CV folds and conformal splits
are seeded with seed + r. Reports are therefore reproducible from the
configuration they embed, wall times excepted.
"""

from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import json
import logging
import math
import os
import time

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np
import pandas as pd
from scipy import stats

from spicereg.errors import DataError
from spicereg.models import (
    CvConfig,
    ExperimentCell,
    ExperimentConfig,
    ExperimentId,
    ExperimentReport,
    FeatureKind,
    FeatureMapConfig,
    MeanKind,
    PredictorName,
    SpiceConfig,
    TimingFit,
)
from spicereg.services.conformal_service import (
    BaselinePointPredictor,
    SpicePointPredictor,
    SplitConformalRegressor,
    make_point_predictor,
)
from spicereg.services.datagen_service import SparseStudentTGenerator
from spicereg.services.feature_service import FeatureMap

logger = logging.getLogger(__name__)

DEFAULT_PRESETS_PATH = str(Path(__file__).resolve().parent.parent / "data" / "experiments.json")

TIMING_NOTE = (
    "Wall times depend on the machine they were measured on; "
    "only the trend in n is meaningful."
)


def load_presets(data_path: Optional[str] = None) -> Dict[str, ExperimentConfig]:
    """Experiment presets keyed by experiment id"""
    full_path = data_path or DEFAULT_PRESETS_PATH
    if not os.path.exists(full_path):
        logger.error(f"Experiment presets not found: {full_path}")
        return {}
    with open(full_path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    presets = {key: ExperimentConfig.model_validate({"experiment": key, **value}) for key, value in raw.items()}
    logger.debug(f"Loaded {len(presets)} experiment presets from {full_path}")
    return presets


def preset(experiment: ExperimentId, data_path: Optional[str] = None, **overrides: Any) -> ExperimentConfig:
    """Preset for one experiment with keyword overrides applied (None values ignored)"""
    base = load_presets(data_path).get(experiment.value) or ExperimentConfig(experiment=experiment)
    updates = {key: value for key, value in overrides.items() if value is not None}
    return ExperimentConfig.model_validate({**base.model_dump(), **updates})


def experiment_feature_map(config: ExperimentConfig) -> FeatureMap:
    """phi(x) = col{1, x}: constant mean, linear penalized block"""
    return FeatureMap(FeatureMapConfig(kind=FeatureKind.LINEAR, mean_kind=MeanKind.CONSTANT, d=config.generator.d))


def _cv_config(config: ExperimentConfig, replication: int) -> CvConfig:
    return CvConfig(folds=config.folds, grid_size=config.grid_size, seed=config.seed + replication)


def _fit_timed(name: PredictorName, feature_map: FeatureMap, config: ExperimentConfig,
               X: np.ndarray, y: np.ndarray, replication: int) -> Tuple[Any, float]:
    start = time.perf_counter()
    if name == PredictorName.SPICE:
        predictor = SpicePointPredictor(feature_map, SpiceConfig(cycles=config.cycles)).fit(X, y)
    else:
        predictor = BaselinePointPredictor(feature_map, name, _cv_config(config, replication)).fit(X, y)
    return predictor, time.perf_counter() - start


def _describe(predictor: Any, u: int) -> Dict[str, Any]:
    if isinstance(predictor, SpicePointPredictor):
        return {"hyperparameter": None, "support": float(predictor.model.nonzero_count()), "grid": None}
    regressor = predictor.regressor
    support = None
    if regressor.method == PredictorName.LASSO:
        support = float(np.count_nonzero(regressor.weights[u:]))
    return {"hyperparameter": regressor.result.best, "support": support, "grid": regressor.result.grid}


def run_replication(task: Tuple[ExperimentConfig, int, int]) -> Dict[str, Dict[str, Any]]:
    """
    One replication at one sample size, for every configured predictor.

    Module-level so it can be shipped to worker processes.

    Returns:
        Per-predictor metrics; SPICE also carries its test residuals
    """
    config, n, replication = task
    generator = SparseStudentTGenerator(config.generator)
    feature_map = experiment_feature_map(config)
    out: Dict[str, Dict[str, Any]] = {}

    if config.experiment == ExperimentId.TABLE2:
        X, y = generator.sample(2 * n, replication)
        X_test, y_test = generator.sample(config.n_test, replication, stream=2)
        for name in config.predictors:
            predictor = make_point_predictor(name, feature_map, SpiceConfig(cycles=config.cycles),
                                             _cv_config(config, replication))
            start = time.perf_counter()
            regressor = SplitConformalRegressor(predictor, config.kappa_cov, seed=config.seed + replication).fit(X, y)
            wall = time.perf_counter() - start
            summary = regressor.coverage(X_test, y_test)
            metrics = {"wall": wall, "length": summary.mean_length, "coverage": summary.coverage}
            metrics.update(_describe(predictor, feature_map.u))
            if name == PredictorName.SPICE:
                metrics["residuals"] = y_test - regressor.predictor.predict(X_test)
            out[name.value] = metrics
        return out

    X, y = generator.sample(n, replication)
    X_test, y_test = (None, None)
    if config.experiment == ExperimentId.TABLE1:
        X_test, y_test = generator.sample(config.n_test, replication, stream=2)

    for name in config.predictors:
        predictor, wall = _fit_timed(name, feature_map, config, X, y, replication)
        metrics: Dict[str, Any] = {"wall": wall}
        metrics.update(_describe(predictor, feature_map.u))
        if X_test is not None:
            residuals = y_test - predictor.predict(X_test)
            metrics["risk"] = float(np.mean(residuals ** 2))
            if name == PredictorName.SPICE:
                metrics["residuals"] = residuals
        out[name.value] = metrics
    return out


def _mean(rows: List[Dict[str, Any]], key: str) -> Optional[float]:
    values = [row[key] for row in rows if row.get(key) is not None]
    return float(np.mean(values)) if values else None


def _summarize(n: int, name: PredictorName, rows: List[Dict[str, Any]], noise_variance: float) -> ExperimentCell:
    risk = _mean(rows, "risk")
    grids = [row["grid"] for row in rows if row.get("grid") is not None]
    return ExperimentCell(
        n=n,
        predictor=name,
        replications=len(rows),
        risk=risk,
        risk_db=10.0 * math.log10(risk / noise_variance) if risk is not None and risk > 0 else None,
        interval_length=_mean(rows, "length"),
        coverage=_mean(rows, "coverage"),
        wall_time=_mean(rows, "wall"),
        mean_hyperparameter=_mean(rows, "hyperparameter"),
        mean_support=_mean(rows, "support"),
        grids=grids or None,
    )


def _run_tasks(tasks: List[Tuple[ExperimentConfig, int, int]], n_jobs: int) -> List[Dict[str, Dict[str, Any]]]:
    workers = (os.cpu_count() or 1) if n_jobs == -1 else int(n_jobs)
    workers = max(1, min(workers, len(tasks)))
    if workers == 1:
        return [run_replication(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        # map preserves submission order, so results do not depend on scheduling
        return list(ex.map(run_replication, tasks))


def fit_timing_line(ns: List[int], walls: List[float]) -> TimingFit:
    """Least-squares wall time = slope * n + intercept"""
    if len(ns) < 2:
        raise DataError("a timing line needs at least two sample sizes")
    fit = stats.linregress(np.asarray(ns, dtype=float), np.asarray(walls, dtype=float))
    return TimingFit(slope=float(fit.slope), intercept=float(fit.intercept), r_squared=float(fit.rvalue ** 2))


def resolved_settings(config: ExperimentConfig) -> Dict[str, Any]:
    feature_map = experiment_feature_map(config)
    return {
        "feature_map": feature_map.to_dict(),
        "p": feature_map.p,
        "u": feature_map.u,
        "rank": config.generator.resolved_rank,
        "nu": config.generator.nu,
        "tail_fraction": config.generator.tail_fraction,
        "noise_variance": config.generator.noise_variance,
        "noise_scale": config.generator.noise_scale,
        "cycles": config.cycles,
        "ridge_grid_rule": f"geomspace(1e-4, 1e4, {config.grid_size}) * tr(Gamma) / p",
        "lasso_grid_rule": f"geomspace(1e-3, 1, {config.grid_size}) * 2 max|rho_j>=u| / n",
        "train_stream": f"[{config.generator.seed}, 1, replication]",
        "test_stream": f"[{config.generator.seed}, 2, replication]",
        "cv_and_split_seed": f"{config.seed} + replication",
    }


def run_experiment(config: ExperimentConfig) -> Tuple[ExperimentReport, np.ndarray]:
    """
    Run every (n, predictor) cell of an experiment.

    Returns:
        (report, SPICE out-of-sample residuals at the largest n; empty for timing runs)
    """
    n_jobs = config.n_jobs
    if config.experiment == ExperimentId.TABLE3_TIMING and n_jobs != 1:
        logger.warning("Timing runs are executed sequentially so wall times do not compete for cores")
        n_jobs = 1

    cells: List[ExperimentCell] = []
    residuals = np.empty(0)
    for n in config.n_grid:
        tasks = [(config, n, r) for r in range(config.replications)]
        results = _run_tasks(tasks, n_jobs)
        for name in config.predictors:
            cell = _summarize(n, name, [res[name.value] for res in results], config.generator.noise_variance)
            cells.append(cell)
            logger.info(
                f"{config.experiment.value} n={n} {name.value}: risk_db={cell.risk_db} "
                f"length={cell.interval_length} coverage={cell.coverage} wall={cell.wall_time:.4g}s"
            )
        if n == config.n_grid[-1] and PredictorName.SPICE in config.predictors:
            chunks = [res[PredictorName.SPICE.value].get("residuals") for res in results]
            chunks = [c for c in chunks if c is not None]
            if chunks:
                residuals = np.concatenate(chunks)

    timing_fit = None
    note = None
    if config.experiment == ExperimentId.TABLE3_TIMING:
        note = TIMING_NOTE
        if len(config.n_grid) >= 2:
            timing_fit = {}
            for name in config.predictors:
                walls = [c.wall_time for c in cells if c.predictor == name]
                timing_fit[name.value] = fit_timing_line(config.n_grid, walls)

    report = ExperimentReport(
        config=config,
        resolved=resolved_settings(config),
        cells=cells,
        timing_fit=timing_fit,
        generated_at=datetime.now().isoformat(),
        note=note,
    )
    return report, residuals


def cells_frame(report: ExperimentReport) -> pd.DataFrame:
    return pd.DataFrame([cell.model_dump(mode="json", exclude={"grids"}) for cell in report.cells])


def format_table(report: ExperimentReport) -> str:
    """Plain-text table: one row per n, one column per predictor"""
    def entry(cell: ExperimentCell) -> str:
        if report.config.experiment == ExperimentId.TABLE1:
            return "-" if cell.risk_db is None else f"{cell.risk_db:.2f}"
        if report.config.experiment == ExperimentId.TABLE2:
            return f"{cell.interval_length:.2f} ({cell.coverage:.2f})"
        return f"{cell.wall_time:.4f}"

    titles = {
        ExperimentId.TABLE1: "Risk normalized by noise level [dB]",
        ExperimentId.TABLE2: f"Average interval length (coverage), target {report.config.kappa_cov:.2f}",
        ExperimentId.TABLE3_TIMING: "Average fit wall time [s]",
    }
    label = "n'" if report.config.experiment == ExperimentId.TABLE2 else "n"
    table = pd.DataFrame(
        {name.value: [entry(c) for c in report.cells if c.predictor == name] for name in report.config.predictors},
        index=pd.Index(report.config.n_grid, name=label),
    )
    lines = [titles[report.config.experiment], "", table.to_string()]
    if report.timing_fit:
        lines.append("")
        for name, fit in report.timing_fit.items():
            lines.append(f"{name}: wall = {fit.slope:.3e} * n + {fit.intercept:.3e}  (R^2 = {fit.r_squared:.4f})")
    if report.note:
        lines += ["", report.note]
    return "\n".join(lines) + "\n"


def write_histogram(residuals: np.ndarray, path: Path, bins: int = 50) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(residuals, bins=bins, density=True, color="0.4")
    ax.set_xlabel("out-of-sample residual y - y_hat")
    ax.set_ylabel("density")
    ax.set_title("SPICE residuals")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def write_report(report: ExperimentReport, residuals: np.ndarray, output_dir: str) -> Path:
    """
    Write report.json, run.json, cells.csv, table.txt and, when residuals
    exist, residuals.svg. The timestamp goes to run.json only, so report.json
    of two runs with the same configuration differs at most in wall times.

    Returns:
        The report directory
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.model_dump_json(indent=2, exclude={"generated_at"}), encoding="utf-8")
    (out / "run.json").write_text(json.dumps({"generated_at": report.generated_at}, indent=2), encoding="utf-8")
    cells_frame(report).to_csv(out / "cells.csv", index=False)
    (out / "table.txt").write_text(format_table(report), encoding="utf-8")
    if residuals.size:
        write_histogram(residuals, out / "residuals.svg")
    logger.info(f"Experiment report written to {out}")
    return out
