"""
Application Configuration Settings

Defines the toolkit configuration using Pydantic's BaseSettings,
loading environment variables from a `.env` file by default.

Includes:

- Debug flag, environment name, log format and optional log file
- Output root for benchmark runs (also browsed by the dashboard)
- Solver defaults shared by the CLI (rho, max_iter, rstop)
- Quasi-geodesic refusal threshold
- Worker pool size for grid comparisons
- Dashboard host and port

The `Settings` class enforces strict environment variable validation to
catch typos or missing values early.

A global `settings` instance is created for convenient import across the package.
"""

from pathlib import Path
from typing import Literal

from pydantic import ConfigDict, Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    debug: bool = Field(default=False, alias='ISTIEFEL_DEBUG')
    env: str = Field(default='testing', alias='ISTIEFEL_ENV')
    log_format: Literal['standard', 'json'] = Field(
        default='standard', alias='ISTIEFEL_LOG_FORMAT'
    )
    log_file: Path | None = Field(default=None, alias='ISTIEFEL_LOG_FILE')

    # Benchmark outputs
    runs_dir: Path = Field(default=Path('runs'), alias='ISTIEFEL_RUNS_DIR')

    # Solver defaults
    rho: float = Field(default=2.0, gt=0, alias='ISTIEFEL_RHO')
    max_iter: int = Field(default=2000, ge=0, alias='ISTIEFEL_MAX_ITER')
    rstop: float = Field(default=1e-5, gt=0, alias='ISTIEFEL_RSTOP')
    qgeo_max_norm: float = Field(default=50.0, gt=0, alias='ISTIEFEL_QGEO_MAX_NORM')

    # Parallel grid runs
    workers: int = Field(default=2, ge=1, alias='ISTIEFEL_WORKERS')

    # Dashboard
    dashboard_host: str = Field(default='0.0.0.0', alias='ISTIEFEL_DASHBOARD_HOST')
    dashboard_port: int = Field(default=7777, alias='ISTIEFEL_DASHBOARD_PORT')

    model_config = ConfigDict(env_file='.env', extra='forbid', frozen=True)


# Create one global settings instance to import elsewhere
settings = Settings()
