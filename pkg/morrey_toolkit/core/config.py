# morrey_toolkit/core/config.py
"""
Configuration Management for the Morrey toolkit
Loads numerical and runtime settings from environment variables with validation
"""

import logging
import sys
from dataclasses import dataclass

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict
from pythonjsonlogger.json import JsonFormatter

# Load .env file
load_dotenv()

TEXT_LOG_FORMAT = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class VerificationThresholds:
    """Declared constants the experiment harness judges evidence against."""

    trend_slope: float
    unbounded_slope: float
    stability_tolerance: float
    pointwise_tolerance: float


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MORREY_",
        case_sensitive=True,
        extra="ignore",
    )

    # ========================================
    # Logging
    # ========================================
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "text"

    # ========================================
    # Parallelism
    # ========================================
    THREADS: int = 1

    # ========================================
    # Quadrature
    # ========================================
    SPHERE_QUADRATURE_POINTS: int = 4096
    INFINITY_SENTINEL: float = 1e12
    HALF_LINE_MIN: float = 1e-8
    HALF_LINE_MAX: float = 1e8
    POINTS_PER_DECADE: int = 100
    DEFAULT_T_POINTS: int = 64
    HEAT_CUTOFF: float = 8.0

    # ========================================
    # Verdict thresholds
    # ========================================
    DOUBLING_CAP: float = 8.0
    TREND_SLOPE: float = 0.05
    UNBOUNDED_SLOPE: float = 0.2
    STABILITY_TOLERANCE: float = 0.10
    POINTWISE_TOLERANCE: float = 0.03

    def thresholds(self) -> VerificationThresholds:
        return VerificationThresholds(
            trend_slope=self.TREND_SLOPE,
            unbounded_slope=self.UNBOUNDED_SLOPE,
            stability_tolerance=self.STABILITY_TOLERANCE,
            pointwise_tolerance=self.POINTWISE_TOLERANCE,
        )

    def validate_numeric_settings(self) -> list[str]:
        """Collect settings that would make the quadrature meaningless"""
        problems = []

        if self.THREADS < 1:
            problems.append("THREADS must be at least 1")

        if self.SPHERE_QUADRATURE_POINTS < 64:
            problems.append("SPHERE_QUADRATURE_POINTS below 64")

        if not 0 < self.HALF_LINE_MIN < 1 < self.HALF_LINE_MAX:
            problems.append("HALF_LINE_MIN < 1 < HALF_LINE_MAX is required")

        if self.POINTS_PER_DECADE < 10:
            problems.append("POINTS_PER_DECADE below 10")

        if self.LOG_FORMAT not in ("text", "json"):
            problems.append(f"LOG_FORMAT '{self.LOG_FORMAT}' is not text/json")

        return problems


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """Install a single stderr handler on the root logger."""
    level = (level or settings.LOG_LEVEL).upper()
    fmt = fmt or settings.LOG_FORMAT

    handler = logging.StreamHandler(sys.stderr)
    if fmt == "json":
        handler.setFormatter(JsonFormatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    else:
        handler.setFormatter(logging.Formatter(TEXT_LOG_FORMAT))

    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(level)


# Create global settings instance
settings = Settings()

# Validate on import (but don't fail - callers fall back to the defaults)
problems = settings.validate_numeric_settings()
if problems:
    logger = logging.getLogger("morrey_toolkit.config")
    logger.warning(f"⚠️ Suspicious numeric settings: {', '.join(problems)}")
