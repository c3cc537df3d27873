"""
Tests for CSV/JSON serialization and the run artifact manager.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from cavity_bragg.artifacts import RunArtifactManager, resolve_output_dir
from cavity_bragg.constants import DEFAULT_OUTPUT_DIR, MANIFEST_FILENAME, OUTPUT_DIR_ENV_VAR
from cavity_bragg.interfaces import Spectrum, TimeSeries
from cavity_bragg.serialization import format_value, to_jsonable, write_csv, write_json


class TestSerialization:
    """Test suite for the shared writers."""

    @pytest.mark.parametrize("value,expected", [
        (True, "1"),
        (np.bool_(False), "0"),
        (3, "3"),
        (np.int64(7), "7"),
        (0.1, "0.10000000000000001"),
        (18.0, "18"),
        (np.float64(0.25), "0.25"),
        ("1/4", "1/4"),
    ])
    def test_format_value(self, value, expected):
        assert format_value(value) == expected

    def test_csv_round_trips_floats(self, tmp_path):
        values = [0.1, 1 / 3, 2 ** 0.5, 1e-300]
        path = write_csv(tmp_path / "values.csv", ["x"], [[v] for v in values])
        parsed = [float(line) for line in path.read_text().splitlines()[1:]]
        assert parsed == values

    def test_csv_comments_and_line_endings(self, tmp_path):
        path = write_csv(tmp_path / "nested" / "out.csv", ["a", "b"], [(1, 2.5)],
                         comments=["kind=discrete"])
        raw = path.read_bytes()
        assert raw == b"# kind=discrete\na,b\n1,2.5\n"

    def test_to_jsonable(self):
        payload = to_jsonable({"a": np.arange(3), "b": np.float64(1.5), "c": 1 + 2j,
                               "d": (np.int32(4),), "e": Path("x")})
        assert payload == {"a": [0, 1, 2], "b": 1.5, "c": {"re": 1.0, "im": 2.0}, "d": [4], "e": "x"}

    def test_json_keys_are_sorted(self, tmp_path):
        path = write_json(tmp_path / "out.json", {"b": 1, "a": 2})
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 2, "b": 1}

    def test_spectrum_csv(self, tmp_path):
        result = Spectrum(omegas=np.array([0.0, 2.0]), probabilities=np.array([0.75, 0.25]))
        lines = result.to_csv(tmp_path / "spectrum.csv").read_text().splitlines()
        assert lines == ["omega,probability", "0,0.75", "2,0.25"]


class TestResolveOutputDir:
    """Test suite for output directory resolution."""

    def test_explicit_directory_wins(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(tmp_path / "env"))
        assert resolve_output_dir(tmp_path / "explicit") == tmp_path / "explicit"

    def test_environment_variable(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(tmp_path / "env"))
        assert resolve_output_dir() == tmp_path / "env"

    def test_default_directory(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV_VAR, raising=False)
        assert resolve_output_dir() == DEFAULT_OUTPUT_DIR


class TestRunArtifactManager:
    """Test suite for RunArtifactManager."""

    @pytest.fixture
    def manager(self, output_dir):
        return RunArtifactManager("spectrum_abc123", output_dir)

    def test_creates_run_directory(self, manager, output_dir):
        assert manager.run_dir == output_dir / "spectrum_abc123"
        assert manager.run_dir.is_dir()

    def test_uses_environment_directory(self, output_dir):
        manager = RunArtifactManager("collapse_x")
        assert manager.run_dir == output_dir / "collapse_x"

    def test_save_registers_artifacts(self, manager):
        series = TimeSeries(times=np.array([0.0, 1.0]), values=np.array([0.0, 0.5]))
        csv_path = manager.save("intensity.csv", series)
        json_path = manager.save("intensity.json", series, fmt="json")
        assert csv_path.read_text().startswith("t,intensity\n")
        assert json.loads(json_path.read_text())["intensity"] == [0.0, 0.5]
        assert manager.artifacts == [csv_path, json_path]

    def test_unknown_format(self, manager):
        series = TimeSeries(times=np.array([0.0]), values=np.array([0.0]))
        with pytest.raises(ValueError):
            manager.save("intensity.txt", series, fmt="txt")

    def test_manifest(self, manager):
        manager.save_json("summary.json", {"mean": np.float64(2.0)})
        path = manager.write_manifest({"mode": "spectrum"}, "0.1.0", {"lines": 3})
        assert path.name == MANIFEST_FILENAME
        manifest = json.loads(path.read_text())
        assert manifest["run_name"] == "spectrum_abc123"
        assert manifest["version"] == "0.1.0"
        assert manifest["scenario"] == {"mode": "spectrum"}
        assert manifest["artifacts"] == ["summary.json"]
        assert manifest["results"] == {"lines": 3}
        assert manifest["wall_time_seconds"] >= 0.0
