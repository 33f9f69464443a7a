"""
Exception types raised by the VaCoAl engine.

Most domain errors also derive from ``ValueError`` so callers that only
know about the builtin hierarchy keep working. The management commands map
these classes to exit codes (see ``genealogy.management.base``).
"""


class VacoalError(Exception):
    """Base class for every engine error."""

    def details(self) -> dict:
        """Extra machine-readable fields for the CLI error report."""
        return {}


class DimensionError(VacoalError, ValueError):
    """Vector length, segment length or block layout mismatch."""


class CapacityError(VacoalError, ValueError):
    """Label space or memory capacity exhausted."""


class EmptyInputError(VacoalError, ValueError):
    """An operation that needs at least one element received none."""


class NormalizationError(VacoalError, ValueError):
    """A normalisation denominator is zero."""


class UnknownNodeError(VacoalError, KeyError):
    """Start nodes that have no entry in the graph."""

    def __init__(self, node_ids):
        self.node_ids = sorted(node_ids)
        super().__init__(f"Unknown node ids: {', '.join(self.node_ids)}")

    def __str__(self):
        return self.args[0]

    def details(self) -> dict:
        return {"unresolved": self.node_ids}


class CsvParseError(VacoalError, ValueError):
    """A CSV row could not be parsed."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")

    def details(self) -> dict:
        return {"line": self.line}


class CsvFormatError(VacoalError, ValueError):
    """The CSV header does not match the expected layout."""


class SnapshotFormatError(VacoalError, ValueError):
    """A binary artifact has the wrong magic, version or size."""


class ConfigError(VacoalError, ValueError):
    """Invalid run configuration."""


class ArtifactIOError(VacoalError, OSError):
    """Reading or writing a pipeline artifact failed."""


class FrozenMemoryError(VacoalError, RuntimeError):
    """Learning was attempted on a finalized memory."""
