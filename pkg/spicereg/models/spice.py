from pydantic import BaseModel, Field, field_validator
from typing import List, Literal, Optional

from .common import ResidualUpdate
from .features import FeatureMapConfig
from ..config import get_settings


def _default_cycles() -> int:
    return get_settings().DEFAULT_CYCLES


def _default_refresh() -> int:
    return get_settings().REFRESH_EVERY


def _default_residual_update() -> ResidualUpdate:
    return ResidualUpdate(get_settings().RESIDUAL_UPDATE)


class SpiceConfig(BaseModel):
    """Tuning knobs of the online solver"""
    cycles: int = Field(
        default_factory=_default_cycles,
        ge=1,
        description="Full coordinate cycles L per sample"
    )
    refresh_every: int = Field(
        default_factory=_default_refresh,
        ge=1,
        description="Exact xi/zeta refresh period in samples (incremental mode)"
    )
    residual_update: ResidualUpdate = Field(
        default_factory=_default_residual_update,
        description="Recompute xi/zeta every sample, or update them in O(p)"
    )
    inflation_c: Optional[float] = Field(
        None,
        gt=0,
        description="Gaussian-noise weight inflation constant c; off when unset"
    )
    inflation_delta: float = Field(
        default_factory=lambda: get_settings().INFLATION_DELTA,
        gt=0,
        description="delta in the inflation factor c*sqrt(2 ln p + delta)"
    )


class ModelDocument(BaseModel):
    """Persisted SPICE model (version 1)"""
    version: Literal[1] = 1
    feature_map: FeatureMapConfig
    config: SpiceConfig
    n: int = Field(..., ge=0)
    kappa: float = Field(..., ge=0)
    gamma: List[float] = Field(..., description="Gamma, row-major")
    rho: List[float]
    w: List[float]
    xi: float
    zeta: List[float]
    u: int = Field(..., ge=0)
    L: int = Field(..., ge=1)
    update_count: int = Field(default=0, ge=0)

    @field_validator("version", mode="before")
    @classmethod
    def reject_unknown_versions(cls, v):
        """Fail loudly on documents written by another format version"""
        if v != 1:
            raise ValueError(f"unsupported model version: {v!r}")
        return v
