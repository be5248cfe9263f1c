from pydantic import BaseModel, Field, field_validator
from typing import List, Optional

from ..config import get_settings


class CvConfig(BaseModel):
    """K-fold cross-validation setup for Ridge / LASSO"""
    folds: int = Field(
        default_factory=lambda: get_settings().CV_FOLDS,
        ge=2,
        description="Number of folds K"
    )
    grid: Optional[List[float]] = Field(
        None,
        description="Hyperparameter grid; data-driven default when unset"
    )
    grid_size: int = Field(
        default_factory=lambda: get_settings().CV_GRID_SIZE,
        ge=1,
        description="Number of points of the default grid"
    )
    seed: int = Field(default=0, description="Fold shuffle seed")

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Grid must be nonempty, positive and sorted ascending"""
        if v is None:
            return v
        if len(v) == 0:
            raise ValueError("grid must be nonempty")
        if any(not (g > 0) for g in v):
            raise ValueError("grid values must be positive")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("grid must be increasing")
        return v


class CvResult(BaseModel):
    """Outcome of a grid search"""
    grid: List[float]
    risks: List[float] = Field(..., description="Weighted fold risk per grid point")
    best: float = Field(..., description="Selected hyperparameter")
    best_index: int
