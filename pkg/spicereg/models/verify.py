from pydantic import BaseModel, Field
from typing import List, Optional


class BoundReport(BaseModel):
    """Result of one divergence-bound check against the l0 oracle"""
    check: str = Field(..., examples=["lasso", "spice"])
    premise_holds: bool
    bound: float = Field(..., description="Right-hand side of the bound")
    measured: float = Field(..., description="Measured divergence from the oracle")
    passed: bool = Field(..., description="True unless the premise holds and the bound is violated")
    eps_star: float
    r_star: float
    support: List[int]
    theta: Optional[float] = Field(None, description="LASSO hyperparameter, when applicable")


class InflationReport(BaseModel):
    """Frequency of the Gaussian max-correlation event"""
    n: int
    p: int
    delta: float
    trials: int
    event_rate: float
    guaranteed_rate: float = Field(..., description="1 - 2 exp(-delta/2)")
    passed: bool


class BoundSuiteReport(BaseModel):
    """Aggregate of bound checks over random instances"""
    instances: int = Field(..., description="Instances that ran both checks")
    extra_instances: int = Field(0, description="Instances drawn to fill the premise quota")
    n: int
    p: int
    k: int
    lasso_premise_count: int
    lasso_violations: int
    spice_premise_count: int
    spice_violations: int
    noiseless_passed: bool
    inflation: Optional[InflationReport] = None
    failures: List[BoundReport] = Field(default_factory=list)
    reports: List[BoundReport] = Field(default_factory=list, description="Every check, when requested")

    @property
    def passed(self) -> bool:
        return self.lasso_violations == 0 and self.spice_violations == 0 and self.noiseless_passed
