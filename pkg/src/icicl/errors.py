"""Exception types shared across the package."""

from __future__ import annotations


class IciclError(Exception):
    """Base class for all package errors."""


class SpecSyntaxError(IciclError):
    """Input document is not parseable JSON or YAML."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(f"{message}{loc}")


class UnsupportedVersion(IciclError):
    """Document is neither OpenAPI 3.x nor Swagger 2.0."""


class PointerMiss(IciclError):
    """A JSON pointer does not resolve to a node in the document."""

    def __init__(self, pointer: str):
        self.pointer = pointer
        super().__init__(f"pointer does not resolve: {pointer!r}")


class EmptyCorpus(IciclError):
    """Corpus directory contains no parseable spec."""


class CorruptBank(IciclError):
    """Bank file line failed schema validation."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"corrupt bank at line {line_no}: {reason}")


class EmptyBank(IciclError):
    """Bank has no entries to index."""


class InsufficientBank(IciclError):
    """Not enough eligible bank entries to build a prompt context."""


class BackendUnavailable(IciclError):
    """Completion endpoint could not be reached after retries."""


class BackendRejected(IciclError):
    """Completion endpoint answered with a non-2xx status."""

    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"backend rejected request: HTTP {status}: {body[:200]}")


class AllCallsFailed(IciclError):
    """Every diverse generation call failed."""


class GreedyMissing(IciclError):
    """Greedy example absent or type-incorrect; parameter cannot be enriched."""


class DimensionMismatch(IciclError):
    """Embedding vectors of different dimensions were combined."""


class PathCollision(IciclError):
    """Fuzz overload path already exists in the document."""

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"overload path already present: {path!r}")


class MalformedLabels(IciclError):
    """Labels CSV row is malformed."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"malformed labels row at line {line_no}: {reason}")
