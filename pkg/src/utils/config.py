"""Settings loader for the stable knapsack package."""

import os
import re
from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field

CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"
SETTINGS_PATH = CONFIG_DIR / "settings.yaml"
TOLERANCE_ENV = "STABLE_KNAPSACK_TOLERANCE"

_ENV_PATTERN = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-([^}]*))?\}")


class NumericsSettings(BaseModel):
    tolerance: float = Field(default=1e-9, ge=0.0)


class CapSettings(BaseModel):
    brute_force: int = Field(default=24, ge=0)
    candidate_exact: int = Field(default=20, ge=0)
    simple_large: int = Field(default=30, ge=0)


class SensitivitySettings(BaseModel):
    default_trials: int = Field(default=10_000, ge=1)
    ci_z: float = Field(default=1.96, gt=0.0)


class DynamicSettings(BaseModel):
    exact_reference_limit: int = Field(default=12, ge=0)


class ReportSettings(BaseModel):
    schema_version: int = 1
    output_dir: str = "data/reports"


class Settings(BaseModel):
    """Validated view of ``config/settings.yaml``."""

    numerics: NumericsSettings = NumericsSettings()
    caps: CapSettings = CapSettings()
    sensitivity: SensitivitySettings = SensitivitySettings()
    dynamic: DynamicSettings = DynamicSettings()
    reports: ReportSettings = ReportSettings()


def expand_env(value: Any) -> Any:
    """Expand ``${NAME}`` and ``${NAME:-default}`` references recursively."""
    if isinstance(value, dict):
        return {key: expand_env(item) for key, item in value.items()}
    if isinstance(value, list):
        return [expand_env(item) for item in value]
    if isinstance(value, str):

        def substitute(match: re.Match[str]) -> str:
            name, default = match.group(1), match.group(2)
            return os.getenv(name) or (default if default is not None else "")

        expanded = _ENV_PATTERN.sub(substitute, value)
        # Let YAML decide the scalar type of an expanded placeholder
        return yaml.safe_load(expanded) if expanded != value else value
    return value


def load_settings(path: Path | str | None = None) -> Settings:
    """Read settings from YAML, falling back to defaults for a missing file."""
    load_dotenv()
    path = Path(path) if path is not None else SETTINGS_PATH

    raw: dict[str, Any] = {}
    if path.exists():
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}

    settings = Settings.model_validate(expand_env(raw))

    # The environment wins even when the YAML file hardcodes the tolerance
    override = os.getenv(TOLERANCE_ENV)
    if override:
        settings.numerics.tolerance = float(override)
    return settings


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Process-wide cached settings."""
    return load_settings()


def reload_settings() -> Settings:
    get_settings.cache_clear()
    return get_settings()


def tolerance() -> float:
    return get_settings().numerics.tolerance
