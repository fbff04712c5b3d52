"""IO utilities for the stable knapsack package."""

import json
from pathlib import Path
from typing import Any, Union

import pandas as pd

from .config import get_settings
from .time import format_datetime, utc_now


def safe_mkdir(path: Union[str, Path]) -> Path:
    """Safely create directory and all parent directories."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def get_timestamped_filename(name: str, extension: str = "json") -> str:
    """Generate timestamped filename."""
    return f"{format_datetime(utc_now())}_{name}.{extension}"


def get_report_path(filename: str) -> Path:
    """Get path for a report file under the configured output directory."""
    return Path(get_settings().reports.output_dir) / filename


def save_json(data: Any, path: Union[str, Path]) -> Path:
    """Save data as JSON file, creating parent directories if needed."""
    path = Path(path)
    safe_mkdir(path.parent)

    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")

    return path


def save_text(text: str, path: Union[str, Path]) -> Path:
    """Save already serialized text, creating parent directories if needed."""
    path = Path(path)
    safe_mkdir(path.parent)
    path.write_text(text, encoding="utf-8")
    return path


def save_csv(df: pd.DataFrame, path: Union[str, Path], **kwargs: Any) -> Path:
    """Save DataFrame as CSV, creating parent directories if needed."""
    path = Path(path)
    safe_mkdir(path.parent)

    csv_kwargs = {
        "index": False,
        "encoding": "utf-8",
        **kwargs,
    }

    df.to_csv(path, **csv_kwargs)
    return path
