"""Shared fixtures for the test suite.

The two session fixtures run the default-scale QTSH ensemble and the exact
grid oracle once; the acceptance tests and several property tests share them
so the suite stays in the minutes range.
"""

from __future__ import annotations

import pytest

import surfhop as sh


@pytest.fixture(scope="session")
def default_qtsh_result() -> sh.EnsembleResult:
    """Default acceptance-scale QTSH run: N=10^4, seed=42, t_final=2500."""
    return sh.run_ensemble(sh.RunConfig())


@pytest.fixture(scope="session")
def default_exact():
    """Exact oracle on the default configuration, with health diagnostics."""
    frames, diag = sh.run_exact(sh.RunConfig(), return_diagnostics=True)
    return frames, diag
