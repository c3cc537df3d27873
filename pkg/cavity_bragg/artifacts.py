"""
RunArtifactManager for organizing run outputs with a stable structure.

Structure:
<output_dir>/
  <mode>_<scenario digest>/
    spectrum.csv | intensity.csv | photon_statistics.csv | ...
    <summary>.json
    manifest.json
"""

import logging
import os
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from .constants import DEFAULT_OUTPUT_DIR, MANIFEST_FILENAME, OUTPUT_DIR_ENV_VAR
from .serialization import write_json

logger = logging.getLogger(__name__)


def resolve_output_dir(output_dir: Optional[Path] = None) -> Path:
    """Explicit directory, else the environment variable, else ./results."""
    if output_dir is not None:
        return Path(output_dir)
    env_dir = os.environ.get(OUTPUT_DIR_ENV_VAR)
    return Path(env_dir) if env_dir else DEFAULT_OUTPUT_DIR


class RunArtifactManager:
    """Writes the artifacts and the manifest of one run into its run directory."""

    def __init__(self, run_name: str, base_dir: Optional[Path] = None):
        """
        Initialize the artifact manager for a run.

        Args:
            run_name: Directory name of the run, `<mode>_<digest>`
            base_dir: Output directory (defaults to the environment variable or ./results)
        """
        self.run_name = run_name
        self.base_dir = resolve_output_dir(base_dir)
        self.run_dir = self.base_dir / run_name
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[Path] = []
        self._started = time.perf_counter()
        logger.info(f"Run directory: {self.run_dir}")

    def path_for(self, filename: str) -> Path:
        return self.run_dir / filename

    def save(self, filename: str, artifact: Any, fmt: str = "csv") -> Path:
        """Save a domain object through its to_csv/to_json method.

        Args:
            filename: File name inside the run directory
            artifact: Object exposing to_csv(path) or to_json(path)
            fmt: "csv" or "json"

        Returns:
            Path written
        """
        path = self.path_for(filename)
        if fmt == "csv":
            artifact.to_csv(path)
        elif fmt == "json":
            artifact.to_json(path)
        else:
            raise ValueError(f"Unknown artifact format: {fmt}")
        return self.register(path)

    def save_json(self, filename: str, payload: Dict[str, Any]) -> Path:
        return self.register(write_json(self.path_for(filename), payload))

    def register(self, path: Path) -> Path:
        self.artifacts.append(Path(path))
        logger.info(f"Wrote artifact: {path}")
        return Path(path)

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self._started

    def write_manifest(self, scenario: Dict[str, Any], version: str,
                       results: Optional[Dict[str, Any]] = None) -> Path:
        """Record resolved parameters, library version, wall time and artifact list."""
        manifest = {
            "run_name": self.run_name,
            "version": version,
            "scenario": scenario,
            "wall_time_seconds": self.elapsed,
            "artifacts": sorted(path.name for path in self.artifacts),
            "results": results or {},
        }
        path = write_json(self.path_for(MANIFEST_FILENAME), manifest)
        logger.info(f"Wrote manifest: {path}")
        return path
