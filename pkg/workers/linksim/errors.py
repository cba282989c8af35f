"""
Error taxonomy for linksim.

The CLI maps these onto exit statuses (see ``policy.kinds.ExitStatus``):
invalid arguments and bad configuration are usage errors, exceeded
enumeration budgets are capability errors.
"""
from __future__ import annotations


class LinkSimError(Exception):
    """Base class for every error raised by linksim."""


class InvalidArgumentError(LinkSimError, ValueError):
    """Shape, length, range, or value violation on an operation input."""


class DegenerateChannelError(InvalidArgumentError):
    """A channel gain is too small to undo its phase rotation."""


class ConfigError(InvalidArgumentError):
    """An experiment configuration file is malformed or inconsistent."""


class CapabilityError(LinkSimError, RuntimeError):
    """The request is well-formed but exceeds a configured resource limit."""

    def __init__(self, message: str, *, limit: int, requested: int) -> None:
        super().__init__(message)
        self.limit = limit
        self.requested = requested
