"""Exception hierarchy shared across the package.

DataError subclasses map to CLI exit code 2, everything else raised by the
library maps to exit code 3.
"""


class EventLocError(Exception):
    """Base class for all errors raised by this package."""


class DataError(EventLocError):
    """Bad input data: unreadable files, schema violations, invalid corpora."""


class CorpusFormatError(DataError):
    """A corpus file could not be parsed; message includes the line number."""


class CorpusValidationError(DataError):
    """A parsed sentence violates a corpus invariant."""

    def __init__(self, sentence_index: int, violations: list[str], line: int | None = None):
        self.sentence_index = sentence_index
        self.violations = violations
        self.line = line
        where = f"sentence {sentence_index}"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: " + "; ".join(violations))


class EmbeddingFormatError(DataError):
    """An embedding text file is empty or has a malformed line."""


class CheckpointError(EventLocError):
    """A model checkpoint is corrupt, truncated, or of an unknown version."""
