from pydantic import BaseModel, Field, field_validator
from typing import List
import math


class ConformalCalibrator(BaseModel):
    """Sorted calibration residuals and the resulting interval half-width"""
    residuals: List[float] = Field(..., description="Sorted absolute residuals r_(1..n2)")
    kappa_cov: float = Field(..., gt=0, lt=1, description="Target coverage level")
    k: int = Field(..., ge=1, description="Rank of the order statistic used")
    half_width: float = Field(..., description="r-bar; infinite when unbounded")

    @field_validator("residuals")
    @classmethod
    def check_sorted(cls, v: List[float]) -> List[float]:
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("residuals must be sorted ascending")
        return v

    @property
    def n_calibration(self) -> int:
        return len(self.residuals)

    @property
    def unbounded(self) -> bool:
        """True when k exceeds the calibration size"""
        return self.k > len(self.residuals) or math.isinf(self.half_width)

    class Config:
        frozen = True


class CoverageSummary(BaseModel):
    """Empirical behaviour of intervals on labelled rows"""
    rows: int
    coverage: float
    mean_length: float
    kappa_cov: float
