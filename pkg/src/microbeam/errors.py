"""Exception hierarchy shared by every stage of the pipeline."""


class MicrobeamError(Exception):
    """Base class for all package errors."""


class DomainError(MicrobeamError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class StructuralError(MicrobeamError, ValueError):
    """Array shapes or sizes do not fit together."""


class ConfigurationError(MicrobeamError, ValueError):
    """A scene, radar or experiment configuration is inconsistent."""


class FormatError(MicrobeamError, ValueError):
    """A file on disk is truncated, corrupt or of an unsupported version."""


class InvariantError(MicrobeamError, RuntimeError):
    """An internal numerical check failed."""
