"""
Split-conformal prediction intervals around any point predictor.

Procedure: split the data in two halves, train on the first, sort the
absolute residuals on the second and take the k-th smallest as the
half-width, k = ceil((n2 + 1) * kappa_cov).
"""

from typing import Optional, Protocol, Tuple
import logging
import math

import numpy as np

from spicereg.errors import DataError, UnboundedIntervalError
from spicereg.models import ConformalCalibrator, CoverageSummary, CvConfig, PredictorName, SpiceConfig
from spicereg.services.baseline_service import CrossValidatedRegressor
from spicereg.services.feature_service import FeatureMap
from spicereg.services.spice_service import SpiceModel

logger = logging.getLogger(__name__)


class PointPredictor(Protocol):
    def fit(self, X: np.ndarray, y: np.ndarray) -> "PointPredictor":
        ...

    def predict(self, X: np.ndarray) -> np.ndarray:
        ...


class SpicePointPredictor:
    """SPICE streamed over the training rows in order"""

    def __init__(self, feature_map: FeatureMap, config: Optional[SpiceConfig] = None):
        self.feature_map = feature_map
        self.config = config
        self.model: Optional[SpiceModel] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SpicePointPredictor":
        self.model = SpiceModel(self.feature_map, self.config).stream(X, y)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.model is None:
            raise DataError("spice predictor is not fitted")
        return self.model.predict_batch(X)


class BaselinePointPredictor:
    """Cross-validated ridge or LASSO on the same regressors"""

    def __init__(self, feature_map: FeatureMap, method: PredictorName, config: Optional[CvConfig] = None):
        self.feature_map = feature_map
        self.regressor = CrossValidatedRegressor(method, config)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "BaselinePointPredictor":
        self.regressor.fit(self.feature_map.evaluate_batch(X), y, u=self.feature_map.u)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.regressor.predict(self.feature_map.evaluate_batch(X))


def make_point_predictor(name: PredictorName, feature_map: FeatureMap,
                         spice_config: Optional[SpiceConfig] = None,
                         cv_config: Optional[CvConfig] = None) -> PointPredictor:
    if name == PredictorName.SPICE:
        return SpicePointPredictor(feature_map, spice_config)
    return BaselinePointPredictor(feature_map, name, cv_config)


def split(n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Random disjoint halves of range(n).

    Args:
        n: number of rows, at least 2
        seed: permutation seed

    Returns:
        (train indices, calibration indices); calibration gets the extra row when n is odd
    """
    if n < 2:
        raise DataError(f"need at least 2 rows to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = n // 2
    return perm[:n_train], perm[n_train:]


def split_dataset(X: np.ndarray, y: np.ndarray, seed: int) -> Tuple[Tuple[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] != y.shape[0]:
        raise DataError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
    train, cal = split(X.shape[0], seed)
    return (X[train], y[train]), (X[cal], y[cal])


def rank_for(n_calibration: int, kappa_cov: float) -> int:
    # Guard against 0.9 * 51 landing just above an integer in floating point.
    return max(1, math.ceil((n_calibration + 1) * kappa_cov - 1e-9))


def calibrate(residuals: np.ndarray, kappa_cov: float) -> ConformalCalibrator:
    """
    Build a calibrator from absolute calibration residuals.

    Returns:
        Calibrator with r-bar = k-th smallest residual, or an unbounded one if k > n2
    """
    r = np.asarray(residuals, dtype=float).ravel()
    if r.size == 0:
        raise DataError("no calibration residuals")
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise DataError("residuals must be finite and nonnegative")
    if not 0 < kappa_cov < 1:
        raise DataError(f"coverage level must lie in (0, 1), got {kappa_cov}")

    r = np.sort(r, kind="stable")
    k = rank_for(r.size, kappa_cov)
    if k > r.size:
        logger.warning(f"{r.size} calibration residuals cannot support coverage {kappa_cov}; interval is unbounded")
        half_width = math.inf
    else:
        half_width = float(r[k - 1])
    return ConformalCalibrator(residuals=r.tolist(), kappa_cov=kappa_cov, k=k, half_width=half_width)


def interval(calibrator: ConformalCalibrator, y_hat: float) -> Tuple[float, float]:
    if calibrator.unbounded:
        raise UnboundedIntervalError(
            f"calibrator with {calibrator.n_calibration} residuals is unbounded at coverage {calibrator.kappa_cov}"
        )
    return y_hat - calibrator.half_width, y_hat + calibrator.half_width


def intervals(calibrator: ConformalCalibrator, y_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized interval() over an array of point predictions"""
    if calibrator.unbounded:
        raise UnboundedIntervalError(
            f"calibrator with {calibrator.n_calibration} residuals is unbounded at coverage {calibrator.kappa_cov}"
        )
    y_hat = np.asarray(y_hat, dtype=float)
    return y_hat - calibrator.half_width, y_hat + calibrator.half_width


def coverage(lower: np.ndarray, upper: np.ndarray, y: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise DataError("no rows")
    return float(np.mean((lower <= y) & (y <= upper)))


class SplitConformalRegressor:
    """
    Point predictor wrapped in a split-conformal calibrator.

    Args:
        predictor: anything with fit(X, y) and predict(X)
        kappa_cov: target coverage
        seed: split seed
    """

    def __init__(self, predictor: PointPredictor, kappa_cov: float, seed: int = 0):
        self.predictor = predictor
        self.kappa_cov = kappa_cov
        self.seed = seed
        self.calibrator: Optional[ConformalCalibrator] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SplitConformalRegressor":
        (X_train, y_train), (X_cal, y_cal) = split_dataset(X, y, self.seed)
        self.predictor.fit(X_train, y_train)
        residuals = np.abs(y_cal - self.predictor.predict(X_cal))
        self.calibrator = calibrate(residuals, self.kappa_cov)
        logger.info(
            f"Calibrated on {len(y_cal)} rows: k={self.calibrator.k}, half-width={self.calibrator.half_width:.4g}"
        )
        return self

    def predict_intervals(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(y_hat, lower, upper) for each row of X"""
        if self.calibrator is None:
            raise DataError("conformal regressor is not fitted")
        y_hat = self.predictor.predict(X)
        lower, upper = intervals(self.calibrator, y_hat)
        return y_hat, lower, upper

    def coverage(self, X: np.ndarray, y: np.ndarray) -> CoverageSummary:
        _, lower, upper = self.predict_intervals(X)
        return CoverageSummary(
            rows=int(np.asarray(y).shape[0]),
            coverage=coverage(lower, upper, y),
            mean_length=2.0 * self.calibrator.half_width,
            kappa_cov=self.kappa_cov,
        )
