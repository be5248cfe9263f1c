from pydantic import BaseModel, Field, field_validator
from typing import Any, Dict, List, Optional

from .common import ExperimentId, PredictorName
from .datagen import SparseStudentTConfig


class ExperimentConfig(BaseModel):
    """Declarative Monte Carlo study on the sparse Student-t generator"""
    experiment: ExperimentId
    replications: int = Field(default=200, ge=1)
    n_grid: List[int] = Field(
        default=[50, 100, 200],
        description="Training sizes (n for table1, n' for table2, n for timing)"
    )
    predictors: List[PredictorName] = Field(
        default=[PredictorName.SPICE, PredictorName.RIDGE, PredictorName.LASSO]
    )
    seed: int = Field(default=0)
    cycles: int = Field(default=3, ge=1, description="SPICE cycles L")
    kappa_cov: float = Field(default=0.9, gt=0, lt=1)
    folds: int = Field(default=10, ge=2)
    grid_size: int = Field(default=10, ge=1)
    n_test: int = Field(default=1000, ge=1, description="Fresh rows per replication for risk/coverage")
    n_jobs: int = Field(default=1, description="Worker processes for replications")
    generator: SparseStudentTConfig = Field(default_factory=SparseStudentTConfig)
    output_dir: Optional[str] = None

    @field_validator("n_grid")
    @classmethod
    def validate_n_grid(cls, v: List[int]) -> List[int]:
        if len(v) == 0 or any(n < 1 for n in v):
            raise ValueError("n grid must hold positive sizes")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n grid must be strictly ascending")
        return v

    @field_validator("predictors")
    @classmethod
    def validate_predictors(cls, v: List[PredictorName]) -> List[PredictorName]:
        if len(v) == 0:
            raise ValueError("at least one predictor is required")
        return list(dict.fromkeys(v))


class ExperimentCell(BaseModel):
    """Averages over replications for one (n, predictor) pair"""
    n: int
    predictor: PredictorName
    replications: int
    risk: Optional[float] = Field(None, description="Mean out-of-sample squared error")
    risk_db: Optional[float] = Field(None, description="10 log10(risk / noise variance)")
    interval_length: Optional[float] = None
    coverage: Optional[float] = None
    wall_time: float = Field(..., description="Mean fit wall time in seconds")
    mean_hyperparameter: Optional[float] = Field(None, description="Mean CV-selected value")
    mean_support: Optional[float] = Field(None, description="Mean nonzero penalized weights")
    grids: Optional[List[List[float]]] = Field(
        None, description="CV hyperparameter grid of every replication, in replication order"
    )


class TimingFit(BaseModel):
    """Least-squares line through (n, wall time)"""
    slope: float
    intercept: float
    r_squared: float


class ExperimentReport(BaseModel):
    """Everything needed to reproduce the numbers it contains"""
    config: ExperimentConfig
    resolved: Dict[str, Any] = Field(
        default_factory=dict,
        description="Resolved defaults: grid rules, noise scale, rank, tail, feature map"
    )
    cells: List[ExperimentCell]
    timing_fit: Optional[Dict[str, TimingFit]] = None
    generated_at: str
    note: Optional[str] = None

    def reproducible_dump(self) -> Dict[str, Any]:
        """JSON payload without the timestamp and the wall-clock measurements"""
        return self.model_dump(
            mode="json",
            exclude={"generated_at": True, "timing_fit": True, "cells": {"__all__": {"wall_time"}}},
        )
