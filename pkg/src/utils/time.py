"""Time utilities for reports and timing."""

import time
from datetime import datetime, timezone


def utc_now() -> datetime:
    """Get current UTC datetime."""
    return datetime.now(timezone.utc)


def format_datetime(dt: datetime, format_str: str = "%Y-%m-%d_%H%M") -> str:
    """Format datetime to string."""
    return dt.strftime(format_str)


class Stopwatch:
    """Wall-clock timer used for per-step timings."""

    def __init__(self) -> None:
        self._start = time.perf_counter()

    def lap(self) -> float:
        """Seconds since the previous lap (or construction)."""
        now = time.perf_counter()
        elapsed = now - self._start
        self._start = now
        return elapsed
