"""
Configuration management for depthrank.

This module handles all application settings and environment variables.
Settings only change defaults and resource use, never numerical results.
"""

from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="DEPTHRANK_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Application Configuration
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Parallelism (0 means all cores)
    THREADS: int = 0
    REPLICATION_CHUNK: int = 50

    # Depth Configuration
    DEFAULT_DIRECTIONS: int = 1000
    PD_EXACT_BUDGET: int = 400_000

    # Oja Configuration
    OJA_ENUMERATION_BUDGET: int = 2_000_000
    OJA_DEFAULT_SUBSETS: int = 200_000

    # Theory Configuration
    QUADRATURE_TOL: float = 1e-8

    # Output
    OUTPUT_DIR: str = "./results"

    # Directories
    BASE_DIR: Path = Path(__file__).parent.parent.parent

    def resolved_threads(self, override: int | None = None) -> int:
        """Thread count for joblib, where -1 means all cores."""
        threads = self.THREADS if override is None else override
        return -1 if threads <= 0 else threads


# Create global settings instance
settings = Settings()
