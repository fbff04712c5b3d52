"""Tests for report writers and timing helpers."""

import json
import re

import pandas as pd

from src.utils.io import get_timestamped_filename, save_csv, save_json, save_text
from src.utils.time import Stopwatch


class TestWriters:
    """JSON, text and CSV writers."""

    def test_save_json_creates_parents(self, tmp_path):
        """Nested directories are created and the file ends with a newline."""
        path = save_json({"a": 1}, tmp_path / "nested" / "out.json")
        text = path.read_text(encoding="utf-8")
        assert json.loads(text) == {"a": 1}
        assert text.endswith("\n")

    def test_save_text_verbatim(self, tmp_path):
        """Serialized text is written unchanged."""
        path = save_text("x,y\n1,2\n", tmp_path / "r" / "out.csv")
        assert path.read_text(encoding="utf-8") == "x,y\n1,2\n"

    def test_save_csv_without_index(self, tmp_path):
        """CSV output has no index column."""
        frame = pd.DataFrame({"item_id": [1, 2], "estimate": [0.5, 1.0]})
        path = save_csv(frame, tmp_path / "est.csv")
        assert path.read_text(encoding="utf-8").splitlines()[0] == "item_id,estimate"


class TestTiming:
    """Timestamped names and the lap stopwatch."""

    def test_timestamped_filename(self):
        """Names carry a sortable UTC stamp and the extension."""
        name = get_timestamped_filename("sensitivity", "csv")
        assert re.fullmatch(r"\d{4}-\d{2}-\d{2}_\d{4}_sensitivity\.csv", name)

    def test_laps_are_non_negative(self):
        """Each lap measures time since the previous one."""
        watch = Stopwatch()
        assert watch.lap() >= 0.0
        assert watch.lap() >= 0.0
