"""
Data models for spicereg
"""

from .common import (
    FeatureKind,
    MeanKind,
    ResidualUpdate,
    PredictorName,
    ExperimentId
)

from .features import FeatureMapConfig

from .spice import (
    SpiceConfig,
    ModelDocument
)

from .baselines import (
    CvConfig,
    CvResult
)

from .conformal import (
    ConformalCalibrator,
    CoverageSummary
)

from .verify import (
    BoundReport,
    InflationReport,
    BoundSuiteReport
)

from .datagen import SparseStudentTConfig

from .experiment import (
    ExperimentConfig,
    ExperimentCell,
    TimingFit,
    ExperimentReport
)

__all__ = [
    # Common
    "FeatureKind",
    "MeanKind",
    "ResidualUpdate",
    "PredictorName",
    "ExperimentId",

    # Features
    "FeatureMapConfig",

    # SPICE
    "SpiceConfig",
    "ModelDocument",

    # Baselines
    "CvConfig",
    "CvResult",

    # Conformal
    "ConformalCalibrator",
    "CoverageSummary",

    # Verification
    "BoundReport",
    "InflationReport",
    "BoundSuiteReport",

    # Data generation
    "SparseStudentTConfig",

    # Experiments
    "ExperimentConfig",
    "ExperimentCell",
    "TimingFit",
    "ExperimentReport",
]
