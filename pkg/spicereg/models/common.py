from enum import Enum


class FeatureKind(str, Enum):
    """Regressor family for psi(x)"""
    LINEAR = "linear"
    LAPLACE_TENSOR = "laplace-tensor"
    LAPLACE_ADDITIVE = "laplace-additive"


class MeanKind(str, Enum):
    """Unpenalized mean block u(x)"""
    NONE = "none"
    CONSTANT = "constant"
    AFFINE = "affine"


class ResidualUpdate(str, Enum):
    """How xi and zeta are brought up to date when a sample arrives"""
    RECOMPUTE = "recompute"
    INCREMENTAL = "incremental"


class PredictorName(str, Enum):
    """Predictors compared in the Monte Carlo study"""
    SPICE = "spice"
    RIDGE = "ridge"
    LASSO = "lasso"


class ExperimentId(str, Enum):
    """Reproducible studies"""
    TABLE1 = "table1"
    TABLE2 = "table2"
    TABLE3_TIMING = "table3-timing"
