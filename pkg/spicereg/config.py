from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    """Application settings and configuration"""

    # Application
    APP_NAME: str = "spicereg"
    VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # Online SPICE solver
    DEFAULT_CYCLES: int = 3
    REFRESH_EVERY: int = 100
    RESIDUAL_UPDATE: str = "recompute"  # or "incremental"
    INFLATION_DELTA: float = 4.0

    # Offline solvers (reference minimizer, oracles)
    CONVERGENCE_TOL: float = 1e-10
    MAX_CONVERGENCE_CYCLES: int = 100000
    PINV_RCOND: float = 1e-12

    # Baselines
    CV_FOLDS: int = 10
    CV_GRID_SIZE: int = 10
    LASSO_TOL: float = 1e-8
    LASSO_MAX_CYCLES: int = 10000

    # Conformal
    DEFAULT_KAPPA_COV: float = 0.9

    # I/O
    CSV_CHUNK_ROWS: int = 10000
    MODEL_FORMAT_VERSION: int = 1

    # Monte Carlo
    N_JOBS: int = 1

    class Config:
        env_file = ".env"
        env_prefix = "SPICEREG_"
        case_sensitive = False
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
