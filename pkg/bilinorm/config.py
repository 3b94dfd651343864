"""Configuration management for bilinorm runs."""

from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Tolerances(BaseModel):
    """Numerical tolerances shared by every decision procedure."""

    model_config = ConfigDict(frozen=True)

    eps_zero: float = Field(
        default=1e-12, gt=0, description="Norms below this count as the zero vector"
    )
    eps_eq: float = Field(
        default=1e-9, gt=0, description="Norm equality and deduplication slack"
    )
    eps_band: float = Field(
        default=1e-7, gt=0, description="Half-width of the inconclusive band"
    )
    eps_attain: float = Field(
        default=1e-8, gt=0, description="Relative slack for norm attainment"
    )

    @model_validator(mode="after")
    def check_ordering(self) -> "Tolerances":
        """The equality slack must sit strictly inside the marginal band."""
        if self.eps_eq >= self.eps_band:
            raise ValueError(
                f"eps_eq ({self.eps_eq}) must be smaller than eps_band ({self.eps_band})"
            )
        return self


DEFAULT_TOLERANCES = Tolerances()


class Settings(BaseSettings):
    """Settings loaded from BB_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="BB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Randomised suites and multi-start ascent
    seed: int = Field(default=0, ge=0, description="Default seed for all randomness")
    starts: int = Field(
        default=64, ge=1, description="Multi-start count for smooth-domain ascent"
    )
    workers: int = Field(
        default=1,
        ge=1,
        description="Threads used for multi-start ascent (results merged deterministically)",
    )

    # Tolerances
    eps_zero: float = Field(default=DEFAULT_TOLERANCES.eps_zero, gt=0)
    eps_eq: float = Field(default=DEFAULT_TOLERANCES.eps_eq, gt=0)
    eps_band: float = Field(default=DEFAULT_TOLERANCES.eps_band, gt=0)
    eps_attain: float = Field(default=DEFAULT_TOLERANCES.eps_attain, gt=0)

    # Reporting
    strict: bool = Field(
        default=False, description="Treat inconclusive checks as failures"
    )
    log_level: str = Field(
        default="WARNING",
        description="Application logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )
    log_dir: Optional[Path] = Field(
        default=None, description="Directory for the JSON app.log (disabled if unset)"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept only the standard logging level names."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @property
    def tolerances(self) -> Tolerances:
        """Tolerances assembled from the individual eps_* settings."""
        return Tolerances(
            eps_zero=self.eps_zero,
            eps_eq=self.eps_eq,
            eps_band=self.eps_band,
            eps_attain=self.eps_attain,
        )


class RunConfig(BaseModel):
    """Resolved configuration of a single CLI run."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0)
    tolerances: Tolerances = DEFAULT_TOLERANCES
    starts: int = Field(default=64, ge=1)
    workers: int = Field(default=1, ge=1)
    output: Optional[Path] = Field(
        default=None, description="Report destination (stdout if unset)"
    )
    strict: bool = False
    timestamps: bool = True

    @classmethod
    def from_settings(cls, settings: Settings, **overrides: Any) -> "RunConfig":
        """Build a run config from settings; ``None`` overrides are ignored."""
        tolerance_overrides = {
            key: overrides.pop(key)
            for key in ("eps_zero", "eps_eq", "eps_band", "eps_attain")
            if overrides.get(key) is not None
        }
        tolerances = settings.tolerances.model_copy(update=tolerance_overrides)
        # model_copy skips validation
        tolerances = Tolerances.model_validate(tolerances.model_dump())

        values: dict[str, Any] = {
            "seed": settings.seed,
            "starts": settings.starts,
            "workers": settings.workers,
            "strict": settings.strict,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(tolerances=tolerances, **values)


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings."""
    return Settings()
