from pydantic import BaseModel, Field, model_validator
from typing import List, Optional

from .common import FeatureKind, MeanKind


class FeatureMapConfig(BaseModel):
    """Serializable description of a regressor map phi(x) = col{u(x), psi(x)}"""
    kind: FeatureKind = Field(
        default=FeatureKind.LINEAR,
        description="Family of the penalized block psi(x)"
    )
    mean_kind: MeanKind = Field(
        default=MeanKind.CONSTANT,
        description="Unpenalized mean block u(x)"
    )
    d: int = Field(..., ge=1, description="Input dimension")
    m: Optional[int] = Field(
        None,
        ge=1,
        description="Basis functions per dimension (Laplace kinds only)"
    )
    half_widths: Optional[List[float]] = Field(
        None,
        description="Box half-widths L_1..L_d (Laplace kinds only)",
        examples=[[1.0, 2.0]]
    )
    centers: Optional[List[float]] = Field(
        None,
        description="Box centers c_1..c_d, default all zero (Laplace kinds only)"
    )

    @model_validator(mode="after")
    def check_laplace_fields(self) -> "FeatureMapConfig":
        """Laplace kinds need m and one positive half-width per dimension"""
        if self.kind == FeatureKind.LINEAR:
            return self
        if self.m is None:
            raise ValueError(f"{self.kind.value} features require m")
        if self.half_widths is None or len(self.half_widths) != self.d:
            raise ValueError(f"{self.kind.value} features require {self.d} half-widths")
        if any(not (hw > 0) for hw in self.half_widths):
            raise ValueError("half-widths must be positive")
        if self.centers is not None and len(self.centers) != self.d:
            raise ValueError(f"expected {self.d} centers, got {len(self.centers)}")
        if self.kind == FeatureKind.LAPLACE_TENSOR and self.m ** self.d > 10 ** 6:
            raise ValueError(f"tensor basis too large: m^d = {self.m ** self.d}")
        return self

    class Config:
        json_schema_extra = {
            "example": {
                "kind": "laplace-tensor",
                "mean_kind": "constant",
                "d": 2,
                "m": 8,
                "half_widths": [3.2, 1.6]
            }
        }
