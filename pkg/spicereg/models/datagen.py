from pydantic import BaseModel, Field, model_validator
from typing import List, Optional


class SparseStudentTConfig(BaseModel):
    """Sparse linear model with nearly colinear Gaussian inputs and Student-t noise"""
    d: int = Field(default=100, ge=1, description="Input dimension")
    support: List[int] = Field(
        default=[1, 10, 20, 30, 40],
        description="1-based indices of the active inputs"
    )
    coefficient: float = Field(default=5.0, description="Weight of every active input")
    intercept: float = Field(default=1.0)
    noise_variance: float = Field(default=4.0, gt=0)
    nu: float = Field(default=3.0, gt=2, description="Student-t degrees of freedom")
    rank: Optional[int] = Field(
        None,
        ge=1,
        description="Rank r of the dominant part of the input covariance; d // 2 when unset"
    )
    tail_fraction: float = Field(
        default=0.1,
        ge=0,
        lt=1,
        description="Share of the input variance spread isotropically over all d directions; "
                    "0 gives an exactly rank-r covariance"
    )
    seed: int = Field(default=0, description="Seed of the mixing matrix and data streams")

    @model_validator(mode="after")
    def check_support(self) -> "SparseStudentTConfig":
        if any(not (1 <= j <= self.d) for j in self.support):
            raise ValueError(f"support indices must lie in 1..{self.d}")
        if self.rank is not None and self.rank > self.d:
            raise ValueError("rank cannot exceed d")
        return self

    @property
    def resolved_rank(self) -> int:
        return self.rank if self.rank is not None else max(1, self.d // 2)

    @property
    def noise_scale(self) -> float:
        """Multiplier turning a unit t_nu draw into noise of the target variance"""
        return (self.noise_variance * (self.nu - 2.0) / self.nu) ** 0.5
