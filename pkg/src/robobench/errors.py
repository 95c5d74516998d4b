"""Exception hierarchy shared across the package."""


class RobobenchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(RobobenchError):
    """Invalid task name, config value, or backend/robot mismatch."""


class UsageError(RobobenchError):
    """API misuse: wrong action shape, step after done, duplicate bus ids."""


class TransportError(RobobenchError):
    """Bus or device failure. ``retries`` records attempts made."""

    def __init__(self, message, retries=0):
        super().__init__(message)
        self.retries = retries


class PolicyError(RobobenchError):
    """A policy produced an unusable action (non-finite values)."""


class FramingError(RobobenchError):
    """Malformed bus frame: bad header, impossible length field."""


class ChecksumError(FramingError):
    """Frame CRC does not match its contents."""
