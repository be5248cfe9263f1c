"""
Regressor maps phi(x) = col{u(x), psi(x)}.

The penalized block psi(x) is either the identity (linear) or the
Laplace operator basis on the box prod_j [c_j - L_j, c_j + L_j]:

    psi_{k_1..k_d}(x) = prod_j sin(pi k_j (x_j - c_j + L_j) / (2 L_j)) / sqrt(L_j)

LaplaceTensor enumerates (k_1, ..., k_d) with k_1 fastest-varying;
LaplaceAdditive stacks the one-dimensional bases dimension by dimension.
"""

from typing import Union
import logging

import numpy as np

from spicereg.errors import DataError
from spicereg.models import FeatureKind, FeatureMapConfig, MeanKind

logger = logging.getLogger(__name__)


class FeatureMap:
    """
    Immutable evaluator for a FeatureMapConfig.

    Safe to share across threads: evaluation only reads the config.
    """

    def __init__(self, config: FeatureMapConfig):
        self.config = config
        self.d = config.d
        if config.kind == FeatureKind.LINEAR:
            self._half_widths = None
            self._centers = None
            self._k = None
        else:
            self._half_widths = np.asarray(config.half_widths, dtype=float)
            self._centers = (
                np.asarray(config.centers, dtype=float)
                if config.centers is not None else np.zeros(self.d)
            )
            self._k = np.arange(1, config.m + 1, dtype=float)

    @property
    def u(self) -> int:
        """Width of the unpenalized mean block"""
        if self.config.mean_kind == MeanKind.NONE:
            return 0
        if self.config.mean_kind == MeanKind.CONSTANT:
            return 1
        return 1 + self.d

    @property
    def q(self) -> int:
        """Width of the penalized block"""
        if self.config.kind == FeatureKind.LINEAR:
            return self.d
        if self.config.kind == FeatureKind.LAPLACE_TENSOR:
            return self.config.m ** self.d
        return self.config.m * self.d

    @property
    def p(self) -> int:
        return self.u + self.q

    def evaluate(self, x: Union[np.ndarray, list]) -> np.ndarray:
        """
        Map one input to its regressor vector.

        Args:
            x: input of length d

        Returns:
            Vector of length p, mean block first.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.d:
            raise DataError(f"expected input of dimension {self.d}, got shape {x.shape}")
        return self.evaluate_batch(x[None, :])[0]

    def evaluate_batch(self, X: Union[np.ndarray, list]) -> np.ndarray:
        """Map an n x d input matrix to the n x p regressor matrix"""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise DataError(f"expected inputs with {self.d} columns, got shape {X.shape}")
        n = X.shape[0]

        if self.config.mean_kind == MeanKind.NONE:
            mean_block = np.empty((n, 0))
        elif self.config.mean_kind == MeanKind.CONSTANT:
            mean_block = np.ones((n, 1))
        else:
            mean_block = np.hstack([np.ones((n, 1)), X])

        if self.config.kind == FeatureKind.LINEAR:
            psi = X
        else:
            sines = self._sines(X)
            if self.config.kind == FeatureKind.LAPLACE_ADDITIVE:
                psi = sines.reshape(n, self.d * self.config.m)
            else:
                psi = self._tensor(sines)

        return np.hstack([mean_block, psi])

    def _sines(self, X: np.ndarray) -> np.ndarray:
        """One-dimensional bases, shape (n, d, m)"""
        L = self._half_widths
        shifted = (X - self._centers + L) / (2.0 * L)
        return np.sin(np.pi * shifted[:, :, None] * self._k[None, None, :]) / np.sqrt(L)[None, :, None]

    def _tensor(self, sines: np.ndarray) -> np.ndarray:
        # Each new dimension becomes the slower index.
        n = sines.shape[0]
        out = sines[:, 0, :]
        for j in range(1, self.d):
            out = (sines[:, j, :, None] * out[:, None, :]).reshape(n, -1)
        return out

    def to_dict(self) -> dict:
        return self.config.model_dump(mode="json", exclude_none=True)

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureMap":
        return cls(FeatureMapConfig.model_validate(data))

    def __repr__(self) -> str:
        return f"FeatureMap(kind={self.config.kind.value}, mean={self.config.mean_kind.value}, p={self.p}, u={self.u})"
