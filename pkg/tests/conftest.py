import numpy as np
import pytest

from spicereg.models import FeatureKind, FeatureMapConfig, MeanKind
from spicereg.services.feature_service import FeatureMap


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def make_linear_map():
    """Factory for phi(x) = col{u(x), x}"""
    def factory(d: int, mean: MeanKind = MeanKind.CONSTANT) -> FeatureMap:
        return FeatureMap(FeatureMapConfig(kind=FeatureKind.LINEAR, mean_kind=mean, d=d))
    return factory


@pytest.fixture
def sparse_linear_data(rng):
    """n=200 rows, d=5 inputs, two active inputs plus an intercept, Gaussian noise"""
    X = rng.standard_normal((200, 5))
    y = 1.0 + 2.0 * X[:, 0] - 1.0 * X[:, 2] + 0.5 * X[:, 4] + 0.5 * rng.standard_normal(200)
    return X, y


@pytest.fixture
def write_rows(tmp_path):
    """Write rows of numbers (or raw lines) to a CSV file and return its path"""
    def factory(name, rows, header=None):
        path = tmp_path / name
        lines = [] if header is None else [header]
        for row in rows:
            lines.append(row if isinstance(row, str) else ",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        return path
    return factory
