"""Exception types shared across the toolkit."""


class CurekitError(Exception):
    """Base class for errors raised by this package."""


class ParseError(CurekitError, ValueError):
    """A structured document is missing keys or carries malformed values."""


class ValidationError(CurekitError, ValueError):
    """A parsed value violates a documented invariant."""


class SolverError(CurekitError, RuntimeError):
    """The transient solve failed (non-finite state or singular system)."""

    def __init__(self, message: str, time_s: float | None = None):
        super().__init__(message)
        self.time_s = time_s


class TraceOverlapError(CurekitError, ValueError):
    """Two traces share no common time window."""


class FileFormatError(CurekitError, ValueError):
    """Base class for binary container problems."""


class FormatVersionError(FileFormatError):
    """File was written with an unsupported format version."""

    def __init__(self, found: int, supported: int):
        super().__init__(
            f"file format version {found} is not supported (this build reads version {supported})"
        )
        self.found = found
        self.supported = supported


class CorruptFileError(FileFormatError):
    """File is truncated or fails its checksum."""


class ExtrapolationWarning(UserWarning):
    """Model inputs fall outside the training ranges; prediction is extrapolated."""


class ConvergenceWarning(UserWarning):
    """Training finished above its configured error bound."""


class ProvenanceWarning(UserWarning):
    """Stored provenance does not match the objects currently in use."""
