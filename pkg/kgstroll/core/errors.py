# kgstroll/core/errors.py
# Exception roots shared by every module.
# The CLI maps ConfigurationError -> exit 1 and InputError -> exit 2.

__all__ = ["KgStrollError", "ConfigurationError", "InputError"]


class KgStrollError(Exception):
    """Base class for all errors raised by kgstroll."""


class ConfigurationError(KgStrollError, ValueError):
    """Invalid parameters, flags or pipeline configuration."""


class InputError(KgStrollError, RuntimeError):
    """Unreadable or malformed input data (files, endpoints)."""
