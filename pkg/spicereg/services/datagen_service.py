from pathlib import Path
from typing import Optional, TextIO, Tuple, Union
import logging

import numpy as np
import pandas as pd

from spicereg.errors import DataError
from spicereg.models import SparseStudentTConfig

logger = logging.getLogger(__name__)


class SparseStudentTGenerator:
    """
    Sparse linear model with nearly colinear Gaussian inputs and Student-t noise.

    x = A z + sqrt(f) e with A a fixed d x r matrix drawn once from the config
    seed, z and e standard normal, and f the tail fraction. A is scaled so that
    tr(A A^T) = (1 - f) d, hence C_x = A A^T + f I has trace d, r dominant
    directions and d - r eigenvalues equal to f.
    y = intercept + coefficient * sum_{j in S} x_j plus t_nu noise rescaled to
    the configured variance.

    Every replication draws from its own stream, so replications are
    independent of each other and of the order they are generated in.
    """

    def __init__(self, config: Optional[SparseStudentTConfig] = None):
        self.config = config or SparseStudentTConfig()
        rng = np.random.default_rng([self.config.seed, 0])
        A = rng.standard_normal((self.config.d, self.config.resolved_rank))
        dominant = (1.0 - self.config.tail_fraction) * self.config.d
        self.mixing = A * np.sqrt(dominant / np.einsum("ij,ij->", A, A))
        self._active = np.asarray(self.config.support, dtype=int) - 1

    @property
    def covariance(self) -> np.ndarray:
        """Population input covariance C_x = A A^T + f I"""
        return self.mixing @ self.mixing.T + self.config.tail_fraction * np.eye(self.config.d)

    @property
    def true_weights(self) -> np.ndarray:
        """Coefficients on x (intercept excluded)"""
        w = np.zeros(self.config.d)
        w[self._active] = self.config.coefficient
        return w

    def mean(self, X: np.ndarray) -> np.ndarray:
        """E[y | x]"""
        X = np.asarray(X, dtype=float)
        return self.config.intercept + self.config.coefficient * X[:, self._active].sum(axis=1)

    def sample(self, n: int, replication: int = 0, stream: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """
        Draw n rows.

        Args:
            n: number of rows, at least 1
            replication: index of the independent data stream
            stream: sub-stream id; experiments draw test rows from stream 2

        Returns:
            (X of shape n x d, y of length n)
        """
        if n < 1:
            raise DataError(f"sample size must be positive, got {n}")
        if stream < 1:
            raise DataError("stream 0 is reserved for the mixing matrix")
        rng = np.random.default_rng([self.config.seed, stream, replication])
        Z = rng.standard_normal((n, self.config.resolved_rank))
        X = Z @ self.mixing.T
        if self.config.tail_fraction > 0:
            X += np.sqrt(self.config.tail_fraction) * rng.standard_normal((n, self.config.d))
        noise = rng.standard_t(self.config.nu, size=n) * self.config.noise_scale
        return X, self.mean(X) + noise


def write_csv(X: np.ndarray, y: np.ndarray, target: Union[str, Path, TextIO], header: bool = True) -> None:
    """Write d feature columns followed by y to a path or an open text stream"""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DataError(f"inputs {X.shape} and targets {y.shape} do not match")
    columns = [f"x{j + 1}" for j in range(X.shape[1])] + ["y"]
    frame = pd.DataFrame(np.column_stack([X, y]), columns=columns)
    frame.to_csv(target if hasattr(target, "write") else Path(target), index=False, header=header)
    logger.info(f"Wrote {X.shape[0]} rows")
