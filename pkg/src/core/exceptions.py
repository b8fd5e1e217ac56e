"""
Exception types shared by the moplda services.
File: src/core/exceptions.py
"""

from typing import Iterable, List, Optional


class ConfigError(ValueError):
    """Invalid option value or configuration file content."""


class UsageError(ConfigError):
    """Command-line usage error (missing or conflicting options)."""


class InvariantError(ValueError):
    """A domain object was constructed in violation of its invariants."""


class CorpusFormatError(ValueError):
    """Vectors, trials or scores file could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
        if line is not None:
            location = f"{location}:{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)


class UnresolvedIdError(ValueError):
    """Trial references ids that are missing from the enrollment or test sets."""

    def __init__(self, kind: str, missing: Iterable[str]):
        self.kind = kind
        self.missing: List[str] = sorted(set(missing))
        super().__init__(
            f"{len(self.missing)} unresolved {kind} id(s): {', '.join(self.missing[:10])}"
            + (" ..." if len(self.missing) > 10 else "")
        )


class SelectionError(ValueError):
    """Between-class vectors cannot be selected for a speaker."""


class ModelFormatError(ValueError):
    """Model file is malformed."""


class ChecksumError(ModelFormatError):
    """Model payload does not match the checksum in its manifest."""


class UnsupportedVersionError(ModelFormatError):
    """Model file was written with an unknown format version."""


class NumericalError(ArithmeticError):
    """A numerical step of training or scoring failed."""


class SingularMatrixError(NumericalError):
    """A matrix that has to be inverted is singular."""


class BracketError(NumericalError):
    """The r x r bracket of the speaker-space update is singular or indefinite."""


class MetricError(ValueError):
    """Detection metrics cannot be computed for the given trials."""
