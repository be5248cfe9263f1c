"""
Dense best linear unbiased predictor for fixed covariance hyperparameters.

Moment model: E[y|x] = u(x)^T w0, Sigma = Psi Theta Psi^T + theta0 I,
r(x) = Psi Theta psi(x). The linear-combiner weights are

    lambda(x) = Sigma^-1 U A^+ u(x) + Sigma^-1 (r(x) - U A^+ U^T Sigma^-1 r(x)),
    A = U^T Sigma^-1 U,

and the equivalent regression weights are

    w0 = A^+ U^T Sigma^-1 y,   w1 = Theta Psi^T Sigma^-1 (y - U w0).

O(n^3); intended for small verification instances only.
"""

from dataclasses import dataclass
from typing import Optional, Tuple
import logging
import math

import numpy as np
from scipy import linalg

from spicereg.config import get_settings
from spicereg.errors import DataError, NumericalError

logger = logging.getLogger(__name__)


class MomentModel:
    """
    BLUP machinery over a regressor matrix Phi = [U Psi].

    Args:
        Phi: n x p regressors, first u columns form U
        y: targets
        u: mean block width
        theta0: noise level
        theta: length q = p - u, nonnegative
    """

    def __init__(self, Phi: np.ndarray, y: np.ndarray, u: int, theta0: float, theta: np.ndarray):
        Phi = np.asarray(Phi, dtype=float)
        y = np.asarray(y, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if Phi.ndim != 2 or y.shape != (Phi.shape[0],):
            raise DataError(f"design {Phi.shape} and targets {y.shape} do not match")
        if not 0 <= u <= Phi.shape[1] or theta.shape != (Phi.shape[1] - u,):
            raise DataError(f"expected {Phi.shape[1] - u} hyperparameters, got shape {theta.shape}")
        if theta0 < 0 or np.any(theta < 0):
            raise DataError("hyperparameters must be nonnegative")

        self.Phi = Phi
        self.y = y
        self.u = u
        self.theta0 = float(theta0)
        self.theta = theta
        self.U = Phi[:, :u]
        self.Psi = Phi[:, u:]

        sigma = (self.Psi * theta) @ self.Psi.T + self.theta0 * np.eye(Phi.shape[0])
        try:
            self._chol = linalg.cho_factor(sigma, lower=True, check_finite=False)
        except linalg.LinAlgError as e:
            raise NumericalError("Sigma is singular (theta0 = 0 with rank-deficient Psi Theta Psi^T)") from e

        self._sinv_U = self._solve(self.U)
        self._A_pinv = (
            np.linalg.pinv(self.U.T @ self._sinv_U, rcond=get_settings().PINV_RCOND)
            if u > 0 else np.zeros((0, 0))
        )

    def _solve(self, b: np.ndarray) -> np.ndarray:
        return linalg.cho_solve(self._chol, b, check_finite=False)

    def with_theta(self, theta0: float, theta: np.ndarray) -> "MomentModel":
        return MomentModel(self.Phi, self.y, self.u, theta0, theta)

    def blup_weights(self, phi_x: np.ndarray) -> np.ndarray:
        """
        Linear-combiner weights lambda(x) for one regressor phi(x) = col{u(x), psi(x)}.

        Warns when u(x) is not reproduced by U^T lambda (outside the row space of U).
        """
        phi_x = np.asarray(phi_x, dtype=float)
        u_x, psi_x = phi_x[:self.u], phi_x[self.u:]
        r = self.Psi @ (self.theta * psi_x)
        sinv_r = self._solve(r)
        if self.u == 0:
            return sinv_r
        lam = sinv_r + self._sinv_U @ (self._A_pinv @ (u_x - self._sinv_U.T @ r))
        gap = np.max(np.abs(self.U.T @ lam - u_x))
        if gap > 1e-8 * max(1.0, float(np.max(np.abs(u_x)))):
            logger.warning(f"u(x) is outside the row space of U (constraint gap {gap:.3g})")
        return lam

    def lr_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        """Regression-form weights (w0, w1)"""
        if self.u > 0:
            w0 = self._A_pinv @ (self._sinv_U.T @ self.y)
        else:
            w0 = np.zeros(0)
        w1 = self.theta * (self.Psi.T @ self._solve(self.y - self.U @ w0))
        return w0, w1

    def predict_lc(self, phi_x: np.ndarray) -> float:
        return float(self.blup_weights(phi_x) @ self.y)

    def predict_lr(self, phi_x: np.ndarray) -> float:
        w0, w1 = self.lr_weights()
        return float(np.asarray(phi_x, dtype=float) @ np.concatenate([w0, w1]))

    def scale_invariance_check(self, phi_x: np.ndarray, c: float, marginal: bool = False) -> bool:
        """
        True iff the prediction at phi_x is unchanged (1e-8 relative) when
        theta0 and every theta_k are multiplied by c. With marginal=True only
        theta0 is scaled, which generally changes the prediction.
        """
        if not c > 0:
            raise DataError(f"scale must be positive, got {c}")
        scaled = self.with_theta(self.theta0 * c, self.theta if marginal else self.theta * c)
        a, b = self.predict_lc(phi_x), scaled.predict_lc(phi_x)
        return abs(a - b) <= 1e-8 * max(1.0, abs(a))


@dataclass
class ThetaRoundtrip:
    """Hyperparameters read off SPICE weights and the resulting BLUP agreement"""
    theta0: float
    theta: np.ndarray
    max_deviation: Optional[float]
    skipped: bool = False
    diagnostic: str = ""


def spice_theta(Phi: np.ndarray, y: np.ndarray, u: int, w_hat: np.ndarray) -> Tuple[float, np.ndarray]:
    """theta0 = ||y - Phi w|| / sqrt(n), theta_k = |w_{u+k}| / ||phi~_{u+k}||"""
    Phi = np.asarray(Phi, dtype=float)
    w_hat = np.asarray(w_hat, dtype=float)
    n = Phi.shape[0]
    resid = np.asarray(y, dtype=float) - Phi @ w_hat
    theta0 = float(np.linalg.norm(resid)) / math.sqrt(n)
    norms = np.linalg.norm(Phi[:, u:], axis=0)
    weights = np.abs(w_hat[u:])
    theta = np.divide(weights, norms, out=np.zeros_like(weights), where=norms > 0)
    return theta0, theta


def spice_theta_roundtrip(Phi: np.ndarray, y: np.ndarray, u: int, w_hat: np.ndarray,
                          test_Phi: np.ndarray) -> ThetaRoundtrip:
    """
    Check that the BLUP under the SPICE-implied hyperparameters reproduces
    the SPICE predictions phi(x)^T w_hat at the test regressors.
    """
    theta0, theta = spice_theta(Phi, y, u, w_hat)
    if theta0 == 0.0:
        msg = "interpolating fit (theta0 = 0); roundtrip skipped"
        logger.warning(msg)
        return ThetaRoundtrip(theta0=theta0, theta=theta, max_deviation=None, skipped=True, diagnostic=msg)

    model = MomentModel(Phi, y, u, theta0, theta)
    test_Phi = np.atleast_2d(np.asarray(test_Phi, dtype=float))
    spice_pred = test_Phi @ np.asarray(w_hat, dtype=float)
    blup_pred = np.array([model.predict_lc(row) for row in test_Phi])
    deviation = float(np.max(np.abs(spice_pred - blup_pred)))
    return ThetaRoundtrip(theta0=theta0, theta=theta, max_deviation=deviation)
