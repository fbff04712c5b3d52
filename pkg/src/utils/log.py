"""Logging setup for the stable knapsack package."""

import logging
import logging.config
from pathlib import Path

import yaml

from .config import CONFIG_DIR

LOGGING_PATH = CONFIG_DIR / "logging.yaml"


def setup_logging(verbose: bool = False, path: Path | str | None = None) -> None:
    """Configure logging from ``config/logging.yaml``.

    Falls back to ``basicConfig`` when the file is missing. ``verbose`` lowers
    the package logger to DEBUG.
    """
    path = Path(path) if path is not None else LOGGING_PATH

    if path.exists():
        with open(path, "r", encoding="utf-8") as f:
            logging.config.dictConfig(yaml.safe_load(f))
    else:
        logging.basicConfig(
            level=logging.WARNING,
            format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
        )

    if verbose:
        logging.getLogger("src").setLevel(logging.DEBUG)
