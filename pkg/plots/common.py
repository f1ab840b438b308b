"""Shared CSV loading for the figure scripts.

The scripts consume the simulator CLI's CSV files and nothing else — no
simulation code is imported.  Columns are validated up front so a missing
field fails with its name instead of a KeyError deep inside matplotlib.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """A required CSV column is absent."""

    def __init__(self, path, column: str):
        self.path = str(path)
        self.column = column
        super().__init__(f"{path}: missing required column '{column}'")


def load_columns(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read a CSV into float arrays, insisting on the required columns."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaError(path, column)
        rows = list(reader)
    return {
        name: np.array([float(row[name]) for row in rows]) for name in header
    }


def detect_engine_suffix(path) -> str | None:
    """Return the engine name of a comparison CSV, or None for a plain run.

    Comparison files carry paired columns like ``p_plus_qtsh,p_plus_exact``;
    plain run files carry bare ``p_plus``.
    """
    with Path(path).open(newline="") as fh:
        header = next(csv.reader(fh))
    if "p_plus" in header:
        return None
    for name in header:
        if name.startswith("p_plus_") and name != "p_plus_exact":
            return name[len("p_plus_") :]
    raise SchemaError(path, "p_plus")
