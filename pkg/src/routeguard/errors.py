"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class RouteguardError(Exception):
    """Base class for all errors raised by this package."""


class LexError(RouteguardError):
    def __init__(self, message: str, path: str = "<source>", line: int = 0, col: int = 0):
        self.path, self.line, self.col = path, line, col
        super().__init__(f"{path}:{line}:{col}: {message}")


class ParseError(LexError):
    pass


class ResolveError(RouteguardError):
    pass


class MinilangRuntimeError(RouteguardError):
    """Type mismatch, division by zero, missing router, depth cap."""


class CycleError(RouteguardError):
    pass


class MissingHash(RouteguardError):
    pass


class NoCallers(RouteguardError):
    pass


class EnvelopeError(RouteguardError):
    """Sealed envelope is not valid Base-64 or has impossible lengths."""


class IntegrityFailure(RouteguardError):
    """Authentication tag mismatch: wrong key or modified ciphertext."""


class EntropyUnavailable(RouteguardError):
    pass


class DescriptorError(RouteguardError):
    pass


class SelectionError(RouteguardError):
    pass


class ConfigError(RouteguardError):
    pass


class ManifestError(RouteguardError):
    pass


class TamperDetected(RouteguardError):
    """Raised by the router when its response strategy says to stop.

    ``message`` is the user-visible line; ``report`` the underlying
    :class:`~routeguard.router.TamperReport`.
    """

    def __init__(self, report, message: str):
        self.report = report
        self.message = message
        super().__init__(message)
