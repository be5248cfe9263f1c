from typing import Union
import logging

import numpy as np

from spicereg.errors import DataError

logger = logging.getLogger(__name__)


class SufficientStats:
    """
    Fixed-size streaming state Gamma = Phi^T Phi, rho = Phi^T y, kappa = y^T y.

    Gamma is stored in full so that column [Gamma]_j is a contiguous row.
    Single writer; readers may inspect the arrays between ingests.
    """

    def __init__(self, p: int):
        if p < 1:
            raise DataError(f"regressor dimension must be positive, got {p}")
        self.p = p
        self.gamma = np.zeros((p, p))
        self.rho = np.zeros(p)
        self.y_energy = 0.0
        self.n = 0

    def ingest(self, phi: Union[np.ndarray, list], y: float) -> "SufficientStats":
        """
        Add one (phi, y) pair.

        Args:
            phi: regressor vector of length p
            y: target

        Returns:
            self, updated in place
        """
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.p,):
            raise DataError(f"expected regressor of length {self.p}, got shape {phi.shape}")
        y = float(y)
        if not (np.all(np.isfinite(phi)) and np.isfinite(y)):
            raise DataError("non-finite sample rejected")

        self.gamma += np.outer(phi, phi)
        self.rho += phi * y
        self.y_energy += y * y
        self.n += 1
        return self

    def ingest_batch(self, Phi: np.ndarray, y: np.ndarray) -> "SufficientStats":
        """Add all rows of an n x p regressor matrix at once"""
        Phi = np.asarray(Phi, dtype=float)
        y = np.asarray(y, dtype=float)
        if Phi.ndim != 2 or Phi.shape[1] != self.p or y.shape != (Phi.shape[0],):
            raise DataError(f"expected n x {self.p} regressors and n targets, got {Phi.shape} and {y.shape}")
        if not (np.all(np.isfinite(Phi)) and np.all(np.isfinite(y))):
            raise DataError("non-finite sample rejected")

        self.gamma += Phi.T @ Phi
        self.rho += Phi.T @ y
        self.y_energy += float(y @ y)
        self.n += Phi.shape[0]
        return self

    def column_norms(self) -> np.ndarray:
        """||phi~_j||_2 = sqrt(Gamma_jj), clamped at zero before the root"""
        return np.sqrt(np.clip(np.diag(self.gamma), 0.0, None))

    def residual_energy(self, w: np.ndarray) -> float:
        """||y - Phi w||^2 from the statistics alone, clamped at zero"""
        w = np.asarray(w, dtype=float)
        value = self.y_energy + float(w @ self.gamma @ w) - 2.0 * float(w @ self.rho)
        return max(value, 0.0)

    def copy(self) -> "SufficientStats":
        other = SufficientStats(self.p)
        other.gamma = self.gamma.copy()
        other.rho = self.rho.copy()
        other.y_energy = self.y_energy
        other.n = self.n
        return other

    def __add__(self, other: "SufficientStats") -> "SufficientStats":
        if not isinstance(other, SufficientStats):
            return NotImplemented
        if other.p != self.p:
            raise DataError(f"cannot merge statistics of dimension {self.p} and {other.p}")
        combined = SufficientStats(self.p)
        combined.gamma = self.gamma + other.gamma
        combined.rho = self.rho + other.rho
        combined.y_energy = self.y_energy + other.y_energy
        combined.n = self.n + other.n
        return combined

    @classmethod
    def from_batch(cls, Phi: np.ndarray, y: np.ndarray) -> "SufficientStats":
        Phi = np.asarray(Phi, dtype=float)
        return cls(Phi.shape[1]).ingest_batch(Phi, y)

    def __repr__(self) -> str:
        return f"SufficientStats(p={self.p}, n={self.n})"
