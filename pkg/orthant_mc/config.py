"""
Configuration management using Pydantic Settings
"""
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional

from orthant_mc import __version__


class Settings(BaseSettings):
    """Application settings"""

    # Application
    APP_NAME: str = "Orthant MC Probit"
    APP_VERSION: str = __version__
    DEBUG: bool = False

    # Parallelism (ORTHANT_MC_THREADS)
    THREADS: int = 1
    CHUNK_SIZE: int = 8192

    # Sampler defaults
    DEFAULT_PROPOSALS: int = 100_000
    DEFAULT_DRAWS: int = 10_000
    MIN_ESS: float = 10.0

    # Gibbs baseline defaults
    GIBBS_ITERS: int = 11_000
    GIBBS_BURNIN: int = 1_000

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_DIR: Optional[str] = None

    # Server Configuration
    HOST: str = "0.0.0.0"
    PORT: int = 8000
    WORKERS: int = 1

    @field_validator("THREADS", "CHUNK_SIZE", mode="before")
    @classmethod
    def at_least_one(cls, v):
        """Clamp worker and chunk counts to at least one"""
        return max(int(v), 1)

    model_config = SettingsConfigDict(
        env_prefix="ORTHANT_MC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


# Global settings instance
settings = Settings()
