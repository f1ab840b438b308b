"""Fixtures for the figure scripts: real CLI outputs plus import wiring.

The scripts are plain files in the plots/ directory (not an installed
package), so the directory is placed on sys.path here.  All input CSVs come
from the simulator's command line — the only interface the scripts may use.
"""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

PLOTS_DIR = Path(__file__).resolve().parent.parent
if str(PLOTS_DIR) not in sys.path:
    sys.path.insert(0, str(PLOTS_DIR))


def _cli(*args) -> None:
    subprocess.run(
        [sys.executable, "-m", "surfhop.cli", *map(str, args)],
        check=True,
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def scan_csv(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("plots") / "scan.csv"
    _cli("scan", "--out", out)
    return out


@pytest.fixture(scope="session")
def run_csv(tmp_path_factory) -> Path:
    prefix = tmp_path_factory.mktemp("plots") / "run"
    _cli("run", "--engine", "qtsh", "--n", "2000", "--seed", "7", "--out", prefix)
    return prefix.with_suffix(".csv")


@pytest.fixture(scope="session")
def compare_csv(tmp_path_factory) -> Path:
    prefix = tmp_path_factory.mktemp("plots") / "cmp"
    _cli(
        "compare", "--engine", "qtsh", "--n", "100", "--t-final", "250",
        "--out", prefix,
    )
    return prefix.with_suffix(".csv")
