"""
Offline comparators: Ridge and LASSO with K-fold cross-validated hyperparameters.

Both minimize the empirical risk R(w) = ||y - Phi w||^2 / n plus a penalty on
the coordinates j >= u only (the mean block stays unpenalized):

    Ridge:  R(w) + (penalty / n) ||w_{>=u}||_2^2
    LASSO:  R(w) + theta ||w_{>=u}||_1
"""

from typing import Callable, List, Optional, Tuple
import logging
import math
import warnings

import numpy as np
from scipy import linalg
from sklearn.model_selection import KFold

from spicereg.config import get_settings
from spicereg.errors import DataError, NumericalError
from spicereg.models import CvConfig, CvResult, PredictorName

logger = logging.getLogger(__name__)

Fitter = Callable[..., np.ndarray]


def _check_design(Phi: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    Phi = np.asarray(Phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if Phi.ndim != 2 or y.shape != (Phi.shape[0],):
        raise DataError(f"design {Phi.shape} and targets {y.shape} do not match")
    if Phi.shape[0] == 0:
        raise DataError("no rows")
    return Phi, y


def ridge_fit_gram(gamma: np.ndarray, rho: np.ndarray, penalty: float, u: int) -> np.ndarray:
    """Solve (Gamma + penalty * diag(0_u, 1)) w = rho"""
    if penalty < 0:
        raise DataError(f"penalty must be nonnegative, got {penalty}")
    system = np.array(gamma, dtype=float, copy=True)
    idx = np.arange(u, system.shape[0])
    system[idx, idx] += penalty
    try:
        with warnings.catch_warnings():
            if penalty == 0:
                # Unregularized: an ill-conditioned Gram means a rank-deficient design.
                warnings.simplefilter("error", linalg.LinAlgWarning)
            return linalg.solve(system, rho, assume_a="sym", check_finite=False)
    except (linalg.LinAlgError, linalg.LinAlgWarning) as e:
        raise NumericalError(f"ridge system is singular at penalty {penalty}") from e


def ridge_fit(Phi: np.ndarray, y: np.ndarray, penalty: float, u: int = 0,
              w_init: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Ridge weights via the normal equations.

    Args:
        Phi: n x p regressors
        y: targets
        penalty: nonnegative ridge penalty (scaled by 1/n inside the risk)
        u: unpenalized prefix length
        w_init: ignored; accepted so ridge and LASSO share one fitter signature

    Returns:
        Weights of length p
    """
    Phi, y = _check_design(Phi, y)
    return ridge_fit_gram(Phi.T @ Phi, Phi.T @ y, penalty, u)


def lasso_cd_gram(gamma: np.ndarray, rho: np.ndarray, n: int, penalties: np.ndarray,
                  w_init: Optional[np.ndarray] = None, tol: Optional[float] = None,
                  max_cycles: Optional[int] = None,
                  callback: Optional[Callable[[int, np.ndarray], None]] = None) -> Tuple[np.ndarray, int]:
    """
    Cyclic soft-thresholding for  (1/n)(kappa + w'Gw - 2 w'rho) + sum_j lambda_j |w_j|.

    Each coordinate is minimized exactly:
        w_j = S(rho_j - sum_{k != j} G_jk w_k, n lambda_j / 2) / G_jj

    Returns:
        (weights, cycles run)
    """
    settings = get_settings()
    tol = settings.LASSO_TOL if tol is None else tol
    max_cycles = settings.LASSO_MAX_CYCLES if max_cycles is None else max_cycles

    p = gamma.shape[0]
    w = np.zeros(p) if w_init is None else np.array(w_init, dtype=float, copy=True)
    zeta = rho - gamma @ w
    thresholds = 0.5 * n * np.asarray(penalties, dtype=float)
    diag = np.diag(gamma).copy()

    cycles = 0
    for cycles in range(1, max_cycles + 1):
        max_change = 0.0
        for j in range(p):
            g_jj = diag[j]
            w_old = w[j]
            if g_jj <= 0.0:
                w_new = 0.0
            else:
                c = zeta[j] + g_jj * w_old
                shrunk = abs(c) - thresholds[j]
                w_new = math.copysign(shrunk, c) / g_jj if shrunk > 0.0 else 0.0
            delta = w_new - w_old
            if delta != 0.0:
                zeta -= gamma[j] * delta
                w[j] = w_new
                max_change = max(max_change, abs(delta))
        if callback is not None:
            callback(cycles, w)
        if max_change < tol:
            break
    return w, cycles


def lasso_fit(Phi: np.ndarray, y: np.ndarray, theta: float, u: int = 0,
              w_init: Optional[np.ndarray] = None, tol: Optional[float] = None,
              max_cycles: Optional[int] = None,
              callback: Optional[Callable[[int, np.ndarray], None]] = None) -> np.ndarray:
    """
    LASSO weights by cyclic coordinate descent.

    Converged when the largest coordinate change in a cycle is below tol
    (default 1e-8) or after max_cycles (default 10^4).
    """
    if theta < 0:
        raise DataError(f"theta must be nonnegative, got {theta}")
    Phi, y = _check_design(Phi, y)
    penalties = np.full(Phi.shape[1], float(theta))
    penalties[:u] = 0.0
    w, _ = lasso_cd_gram(Phi.T @ Phi, Phi.T @ y, Phi.shape[0], penalties,
                         w_init=w_init, tol=tol, max_cycles=max_cycles, callback=callback)
    return w


def lasso_objective(Phi: np.ndarray, y: np.ndarray, w: np.ndarray, theta: float, u: int = 0) -> float:
    Phi, y = _check_design(Phi, y)
    r = y - Phi @ w
    return float(r @ r) / Phi.shape[0] + theta * float(np.abs(w[u:]).sum())


def universal_lasso_theta(sigma: float, n: int, p: int, delta: float) -> float:
    """sigma * sqrt((2 ln p + delta) / n), the Gaussian-noise choice for theta"""
    return sigma * math.sqrt((2.0 * math.log(p) + delta) / n)


def default_grid(method: PredictorName, Phi: np.ndarray, y: np.ndarray, u: int, size: int) -> List[float]:
    """
    Data-driven log-spaced grid.

    Ridge: [1e-4, 1e4] * tr(Gamma) / p.
    LASSO: [1e-3, 1] * 2 ||rho_{>=u}||_inf / n.
    """
    Phi, y = _check_design(Phi, y)
    n, p = Phi.shape
    if method == PredictorName.RIDGE:
        scale = float(np.einsum("ij,ij->", Phi, Phi)) / p
        lo, hi = 1e-4, 1e4
    elif method == PredictorName.LASSO:
        rho = Phi[:, u:].T @ y
        scale = 2.0 * float(np.max(np.abs(rho))) / n if rho.size else 1.0
        lo, hi = 1e-3, 1.0
    else:
        raise DataError(f"no default grid for {method}")
    if not scale > 0:
        scale = 1.0
    return [float(v) for v in np.geomspace(lo * scale, hi * scale, size)] if size > 1 else [hi * scale]


def fold_indices(n: int, folds: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Deterministic fold partition; sizes differ by at most one, extras go to the first folds"""
    if n < folds:
        raise DataError(f"need at least {folds} rows for {folds}-fold CV, got {n}")
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    return list(splitter.split(np.arange(n)))


def cv_select(Phi: np.ndarray, y: np.ndarray, config: CvConfig, fitter: Fitter,
              u: int = 0, grid: Optional[List[float]] = None,
              warm_start: bool = False) -> CvResult:
    """
    Pick the hyperparameter minimizing the K-fold risk.

    Risk is sum_k (n_k / n) * mean_{i in fold k} |y_i - y_hat_{-k}(x_i)|^2.
    Ties go to the larger (more regularized) value. With warm_start the
    grid is traversed from large to small and each fit starts from the
    previous solution.

    Args:
        fitter: callable (Phi, y, hyperparameter, u, w_init=...) -> weights
        grid: overrides config.grid

    Returns:
        CvResult with the grid, risks and the selected value
    """
    Phi, y = _check_design(Phi, y)
    n = Phi.shape[0]
    grid = list(grid if grid is not None else config.grid or [])
    if not grid:
        raise DataError("empty hyperparameter grid")

    risks = np.zeros(len(grid))
    order = list(range(len(grid)))[::-1]
    for train_idx, test_idx in fold_indices(n, config.folds, config.seed):
        w_prev = None
        for g in order:
            w = fitter(Phi[train_idx], y[train_idx], grid[g], u, w_init=w_prev if warm_start else None)
            w_prev = w
            err = y[test_idx] - Phi[test_idx] @ w
            risks[g] += float(err @ err) / n

    best_index = 0
    for g in range(1, len(grid)):
        if risks[g] <= risks[best_index]:
            best_index = g
    logger.debug(f"CV selected {grid[best_index]:.4g} (risk {risks[best_index]:.4g})")
    return CvResult(grid=[float(g) for g in grid], risks=risks.tolist(),
                    best=float(grid[best_index]), best_index=best_index)


class CrossValidatedRegressor:
    """
    Ridge or LASSO with its hyperparameter chosen by cv_select,
    then refit on all rows.
    """

    def __init__(self, method: PredictorName, config: Optional[CvConfig] = None):
        if method not in (PredictorName.RIDGE, PredictorName.LASSO):
            raise DataError(f"unsupported baseline: {method}")
        self.method = method
        self.config = config or CvConfig()
        self.result: Optional[CvResult] = None
        self.weights: Optional[np.ndarray] = None

    @property
    def fitter(self) -> Fitter:
        return ridge_fit if self.method == PredictorName.RIDGE else lasso_fit

    def fit(self, Phi: np.ndarray, y: np.ndarray, u: int = 0) -> "CrossValidatedRegressor":
        grid = self.config.grid or default_grid(self.method, Phi, y, u, self.config.grid_size)
        warm = self.method == PredictorName.LASSO
        self.result = cv_select(Phi, y, self.config, self.fitter, u=u, grid=grid, warm_start=warm)
        self.weights = self.fitter(Phi, y, self.result.best, u)
        return self

    def predict(self, Phi: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise DataError(f"{self.method.value} regressor is not fitted")
        return np.asarray(Phi, dtype=float) @ self.weights
