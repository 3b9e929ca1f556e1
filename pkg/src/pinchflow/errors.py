"""Exception hierarchy shared by all pinchflow modules."""

from __future__ import annotations


class PinchflowError(Exception):
    """Base class for every error raised by the package."""


class GeometryError(PinchflowError):
    """A geometric precondition failed (off-model point, degenerate metric, ...).

    Parameters
    ----------
    message : str
        Human readable description.
    site : tuple of int, optional
        Grid index ``(i, j)`` where the failure was detected.
    """

    def __init__(self, message: str, site=None):
        self.site = None if site is None else tuple(int(s) for s in site)
        if self.site is not None:
            message = f"{message} (site {self.site})"
        super().__init__(message)


class NumericalFailure(PinchflowError):
    """Non-finite values or violated numerical preconditions during a computation."""

    def __init__(self, message: str, site=None, step=None):
        self.site = None if site is None else tuple(int(s) for s in site)
        self.step = step
        extra = []
        if self.site is not None:
            extra.append(f"site {self.site}")
        if step is not None:
            extra.append(f"step {step}")
        if extra:
            message = f"{message} ({', '.join(extra)})"
        super().__init__(message)


class DomainError(PinchflowError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(PinchflowError, ValueError):
    """Invalid run configuration (unknown key, wrong type, out-of-range value)."""


class EstimationError(PinchflowError):
    """A fit or estimate could not be formed from the supplied data."""
