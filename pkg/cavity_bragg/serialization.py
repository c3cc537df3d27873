"""CSV and JSON writers shared by every artifact producer.

CSV files use '.' decimals, '\\n' line ends and 17 significant digits so that
floats round-trip exactly through golden files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from .constants import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Format a single CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), CSV_FLOAT_FORMAT)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
              comments: Optional[List[str]] = None) -> Path:
    """Write rows to a CSV file.

    Args:
        path: Destination file
        header: Column names
        rows: Row sequences, formatted cell by cell
        comments: Optional lines written first, each prefixed with '# '

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='\n', encoding='utf-8') as f:
        for line in comments or []:
            f.write(f"# {line}\n")
        f.write(",".join(header) + "\n")
        n_rows = 0
        for row in rows:
            f.write(",".join(format_value(cell) for cell in row) + "\n")
            n_rows += 1
    logger.debug(f"Wrote {n_rows} rows to {path}")
    return path


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and nested containers to JSON types."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, payload: Any) -> Path:
    """Write a JSON document with stable key order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(to_jsonable(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug(f"Wrote JSON to {path}")
    return path
