"""
Exception hierarchy for the gravimetry engine.

Library code raises these; only the command-line layer turns them into exit codes.
"""


class GravimetryError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GravimetryError, ValueError):
    """A physical quantity is outside its allowed range."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class SingularQfiError(DomainError):
    """The Bloch-vector QFI formula is singular (pure state with radial drift)."""


class EmptyGridError(DomainError):
    """A requested time grid contains no points."""


class ConfigError(GravimetryError):
    """The run configuration cannot be parsed or is incomplete."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class OracleResourceError(GravimetryError):
    """The numerical oracle could not reach its accuracy targets."""


class TruncationError(OracleResourceError):
    """Population leaked into the last retained Fock level."""

    def __init__(self, message, time=None, leakage=None):
        super().__init__(message)
        self.time = time
        self.leakage = leakage


class IntegrationError(OracleResourceError):
    """Step halving did not bring the Lindblad integrator within tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class OutputError(GravimetryError):
    """A report could not be written to its destination."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
