"""
Online SPICE predictor.

Minimizes, at every sample size n, the weighted square-root-l1 cost

    V_n(w) = sqrt(||y - Phi w||^2 / n) + (1/n) * sum_{j >= u} s * ||phi~_j|| * |w_j|

by cyclic coordinate minimization driven only by the sufficient statistics
(Gamma, rho, kappa). s is 1 unless the Gaussian weight inflation is enabled.
The solver keeps two residual summaries in sync with the weights w:

    xi   = ||y - Phi w||^2     (scalar)
    zeta = rho - Gamma w       (vector, = Phi^T (y - Phi w))
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union
import json
import logging
import math

import numpy as np

from spicereg.config import get_settings
from spicereg.errors import DataError, NotFittedError, NumericalError
from spicereg.models import ModelDocument, ResidualUpdate, SpiceConfig
from spicereg.services.feature_service import FeatureMap
from spicereg.services.stats_service import SufficientStats

logger = logging.getLogger(__name__)


@dataclass
class SpiceState:
    """Current weights and the residual summaries that go with them"""
    w: np.ndarray
    xi: float
    zeta: np.ndarray
    u: int
    cycles_per_sample: int
    update_count: int = 0

    @classmethod
    def initial(cls, p: int, u: int, cycles: int) -> "SpiceState":
        return cls(w=np.zeros(p), xi=0.0, zeta=np.zeros(p), u=u, cycles_per_sample=cycles)

    def refresh(self, stats: SufficientStats) -> None:
        """Recompute xi and zeta exactly from (Gamma, rho, kappa, w)"""
        self.xi = stats.residual_energy(self.w)
        self.zeta = stats.rho - stats.gamma @ self.w


def inflation_factor(config: SpiceConfig, p: int) -> float:
    """Multiplier s on the weights phi_j; 1 when inflation is off"""
    if config.inflation_c is None:
        return 1.0
    return config.inflation_c * math.sqrt(2.0 * math.log(p) + config.inflation_delta)


def objective(stats: SufficientStats, w: np.ndarray, u: int, scale: float = 1.0) -> float:
    """
    Weighted square-root-l1 cost V_n(w).

    Args:
        stats: sufficient statistics at sample size n
        w: weights of length p
        u: unpenalized prefix length
        scale: inflation multiplier s on the penalty weights

    Returns:
        sqrt(R(w)) + (s/n) * sum_{j >= u} sqrt(Gamma_jj) |w_j|
    """
    if stats.n == 0:
        raise NotFittedError("objective is undefined before the first sample")
    w = np.asarray(w, dtype=float)
    n = stats.n
    risk = stats.residual_energy(w) / n
    penalty = float(stats.column_norms()[u:] @ np.abs(w[u:]))
    return math.sqrt(risk) + scale * penalty / n


def update_coordinate(state: SpiceState, stats: SufficientStats, j: int, scale: float = 1.0) -> float:
    """
    Exactly minimize the cost over w_j, then update xi and zeta.

    j is 0-based; coordinates j < u are unpenalized.

    Returns:
        The new value of w_j.
    """
    n = stats.n
    g_jj = float(stats.gamma[j, j])
    w_old = float(state.w[j])
    z_j = float(state.zeta[j])
    s2 = scale * scale

    if g_jj <= 0.0:
        # Column identically zero so far: the penalty alone prefers 0.
        w_new = 0.0
    elif j < state.u:
        w_new = (z_j + g_jj * w_old) / g_jj
    elif n <= s2:
        w_new = 0.0
    else:
        c = z_j + g_jj * w_old
        alpha = state.xi + g_jj * w_old * w_old + 2.0 * w_old * z_j
        beta = g_jj
        gamma = abs(c)
        disc = max(alpha * beta - gamma * gamma, 0.0)
        ratio = (n - s2) / s2
        if math.sqrt(ratio) * gamma > math.sqrt(disc):
            r = gamma / beta - math.sqrt(disc / ratio) / beta
            w_new = math.copysign(r, c)
        else:
            w_new = 0.0

    delta = w_old - w_new
    if delta != 0.0:
        state.xi += g_jj * delta * delta + 2.0 * delta * z_j
        state.zeta += stats.gamma[j] * delta
        state.w[j] = w_new
    if state.xi < 0.0:
        state.xi = 0.0
    state.update_count += 1
    return w_new


class SpiceModel:
    """
    Streaming SPICE predictor: feature map + sufficient statistics + solver state.

    One instance is driven by one thread at a time; independent instances
    share nothing and can run in parallel.
    """

    def __init__(self, feature_map: FeatureMap, config: Optional[SpiceConfig] = None):
        self.feature_map = feature_map
        self.config = config or SpiceConfig()
        self.stats = SufficientStats(feature_map.p)
        self.state = SpiceState.initial(feature_map.p, feature_map.u, self.config.cycles)
        self.scale = inflation_factor(self.config, feature_map.p)

    @property
    def p(self) -> int:
        return self.feature_map.p

    @property
    def u(self) -> int:
        return self.feature_map.u

    @property
    def n(self) -> int:
        return self.stats.n

    @property
    def weights(self) -> np.ndarray:
        """Current weights w-hat (copy)"""
        return self.state.w.copy()

    def step(self, x: Union[np.ndarray, list], y: float) -> "SpiceModel":
        """Ingest one raw (x, y) sample and run L cycles"""
        return self.step_regressor(self.feature_map.evaluate(x), y)

    def step_regressor(self, phi: np.ndarray, y: float) -> "SpiceModel":
        """Ingest one precomputed regressor phi(x) and run L cycles"""
        phi = np.asarray(phi, dtype=float)
        self.stats.ingest(phi, y)

        incremental = self.config.residual_update == ResidualUpdate.INCREMENTAL
        if incremental and self.stats.n % self.config.refresh_every != 0:
            # Ingesting leaves w untouched, so e is the new row's residual.
            e = float(y) - float(phi @ self.state.w)
            self.state.xi += e * e
            self.state.zeta += phi * e
        else:
            self.state.refresh(self.stats)

        self.run_cycles(self.config.cycles)
        return self

    def stream(self, X: np.ndarray, y: np.ndarray) -> "SpiceModel":
        """Feed rows in order through step()"""
        Phi = self.feature_map.evaluate_batch(X)
        y = np.asarray(y, dtype=float)
        if y.shape != (Phi.shape[0],):
            raise DataError(f"expected {Phi.shape[0]} targets, got shape {y.shape}")
        for phi_i, y_i in zip(Phi, y):
            self.step_regressor(phi_i, y_i)
        return self

    def run_cycles(self, cycles: int) -> float:
        """
        Run full ascending sweeps over all coordinates.

        Returns:
            Largest absolute coordinate change seen in the last sweep.
        """
        if self.stats.n == 0:
            return 0.0
        max_change = 0.0
        for _ in range(cycles):
            max_change = 0.0
            for j in range(self.p):
                w_old = self.state.w[j]
                w_new = update_coordinate(self.state, self.stats, j, self.scale)
                max_change = max(max_change, abs(w_new - w_old))
        if not math.isfinite(self.state.xi):
            raise NumericalError("solver state became non-finite")
        return max_change

    def fit_to_convergence(self, tol: Optional[float] = None, max_cycles: Optional[int] = None) -> int:
        """
        Refresh the residual summaries, then cycle until the largest
        coordinate change drops below tol.

        Returns:
            Number of full cycles run.
        """
        settings = get_settings()
        tol = settings.CONVERGENCE_TOL if tol is None else tol
        max_cycles = settings.MAX_CONVERGENCE_CYCLES if max_cycles is None else max_cycles
        if self.stats.n == 0:
            raise NotFittedError("no samples to fit")

        self.state.refresh(self.stats)
        for cycle in range(1, max_cycles + 1):
            if self.run_cycles(1) < tol:
                logger.debug(f"SPICE converged after {cycle} cycles at n={self.n}")
                return cycle
        logger.warning(f"SPICE did not reach tol={tol} within {max_cycles} cycles")
        return max_cycles

    def objective(self) -> float:
        return objective(self.stats, self.state.w, self.u, self.scale)

    def predict(self, x: Union[np.ndarray, list]) -> float:
        """phi(x)^T w-hat"""
        if self.stats.n == 0:
            raise NotFittedError("model has not seen any samples")
        return float(self.feature_map.evaluate(x) @ self.state.w)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        if self.stats.n == 0:
            raise NotFittedError("model has not seen any samples")
        return self.feature_map.evaluate_batch(X) @ self.state.w

    def nonzero_count(self) -> int:
        """Nonzero penalized weights"""
        return int(np.count_nonzero(self.state.w[self.u:]))

    def theta_hat(self) -> Tuple[float, np.ndarray]:
        """
        Covariance hyperparameters implied by the current weights.

        theta_0 = ||y - Phi w|| / sqrt(n), theta_k = |w_{u+k}| / ||phi~_{u+k}||.
        Read-only by-product; the predictor itself only uses w.
        """
        if self.stats.n == 0:
            raise NotFittedError("model has not seen any samples")
        theta0 = math.sqrt(self.stats.residual_energy(self.state.w) / self.stats.n)
        norms = self.stats.column_norms()[self.u:]
        weights = np.abs(self.state.w[self.u:])
        theta = np.divide(weights, norms, out=np.zeros_like(weights), where=norms > 0)
        return theta0, theta

    # Persistence

    def to_document(self) -> ModelDocument:
        return ModelDocument(
            feature_map=self.feature_map.config,
            config=self.config,
            n=self.stats.n,
            kappa=self.stats.y_energy,
            gamma=self.stats.gamma.ravel().tolist(),
            rho=self.stats.rho.tolist(),
            w=self.state.w.tolist(),
            xi=self.state.xi,
            zeta=self.state.zeta.tolist(),
            u=self.u,
            L=self.config.cycles,
            update_count=self.state.update_count,
        )

    def to_json(self) -> str:
        # Python's float repr is the shortest round-trip decimal.
        return json.dumps(self.to_document().model_dump(mode="json", exclude_none=True), indent=1)

    @classmethod
    def from_document(cls, document: ModelDocument) -> "SpiceModel":
        model = cls(FeatureMap(document.feature_map), document.config.model_copy(update={"cycles": document.L}))
        p = model.p
        if document.u != model.u:
            raise DataError(f"model file declares u={document.u} but its feature map gives u={model.u}")
        if len(document.gamma) != p * p or len(document.rho) != p or len(document.w) != p or len(document.zeta) != p:
            raise DataError(f"model file arrays do not match p={p}")
        model.stats.gamma = np.asarray(document.gamma, dtype=float).reshape(p, p)
        model.stats.rho = np.asarray(document.rho, dtype=float)
        model.stats.y_energy = document.kappa
        model.stats.n = document.n
        model.state.w = np.asarray(document.w, dtype=float)
        model.state.xi = document.xi
        model.state.zeta = np.asarray(document.zeta, dtype=float)
        model.state.update_count = document.update_count
        return model

    @classmethod
    def from_json(cls, text: str) -> "SpiceModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DataError(f"model file is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise DataError("model file must hold a JSON object")
        if data.get("version") != get_settings().MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported model version: {data.get('version')!r}")
        try:
            document = ModelDocument.model_validate(data)
        except ValueError as e:
            raise DataError(f"invalid model file: {e}") from e
        return cls.from_document(document)

    def __repr__(self) -> str:
        return f"SpiceModel(p={self.p}, u={self.u}, n={self.n}, L={self.config.cycles})"
