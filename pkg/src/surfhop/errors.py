"""Package-wide exception types.

Configuration problems (bad inputs, malformed config files, unusable grids)
raise :class:`ConfigurationError`; failures during propagation raise
:class:`PropagationError` or :class:`GridTooSmallError`.  The CLI maps the
former to exit code 2 and the latter two to exit code 3.
"""

from __future__ import annotations


class ConfigurationError(ValueError):
    """A run configuration is invalid or a config file cannot be used."""


class PropagationError(RuntimeError):
    """A trajectory left the finite domain during integration."""

    def __init__(self, message: str, index: int | None = None, t: float | None = None):
        if index is not None:
            message = f"{message} (trajectory {index}, t={t})"
        super().__init__(message)
        self.index = index
        self.t = t


class SingularJumpError(ValueError):
    """The impulsive momentum-jump formula is singular (d(q*) * pk == 0)."""


class GridTooSmallError(RuntimeError):
    """Wavepacket density reached the edge of the position grid."""
