"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SqlmemError(Exception):
    """Base class for all package errors."""


class SchemaError(SqlmemError):
    """A schema document violates its invariants (bad FK, duplicate name, ...)."""


class InitError(SqlmemError):
    """Database initialization failed; carries the backend message."""


class ExecError(SqlmemError):
    """A SQL statement was rejected by the backend.

    Keeps both the statement text and the backend diagnostic so traces can
    retain the full failure context.
    """

    def __init__(self, statement: str, diagnostic: str):
        super().__init__(f"{diagnostic} [statement: {statement}]")
        self.statement = statement
        self.diagnostic = diagnostic


class RollbackError(SqlmemError):
    """Rollback requested to a snapshot this handle does not know about."""


class UnresolvedPlaceholder(SqlmemError):
    """A template token has no binding and the step is not LLM-resolved."""

    def __init__(self, name: str):
        super().__init__(f"no binding for placeholder <{name}>")
        self.name = name


class EmptySource(SqlmemError):
    """A binding references a result with zero rows: nothing to act on.

    Reported distinctly from other failures so planners and summaries can
    phrase "nothing matched" instead of a generic error.
    """

    def __init__(self, name: str, source_step: int):
        super().__init__(
            f"placeholder <{name}> draws from step {source_step}, which returned no rows"
        )
        self.name = name
        self.source_step = source_step


class AmbiguousScalar(SqlmemError):
    """A scalar binding references a result with more than one row."""

    def __init__(self, name: str, row_count: int):
        super().__init__(
            f"scalar placeholder <{name}> needs exactly 1 source row, got {row_count}"
        )
        self.name = name
        self.row_count = row_count


class PlanParseError(SqlmemError):
    """Plan text does not match the step grammar; carries the line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnsupportedInput(SqlmemError):
    """Rule planner received an input outside its record/question grammar."""


class RemoteError(SqlmemError):
    """An LLM endpoint call failed after the configured retries."""

    def __init__(self, message: str, retries: int):
        super().__init__(f"{message} (after {retries} retries)")
        self.retries = retries


class OracleViolation(SqlmemError):
    """A shop record would break a history invariant (generator bug detector)."""


class UndefinedAnswer(SqlmemError):
    """A question template has no defined answer for this history."""


class InfeasibleConfig(SqlmemError):
    """Dataset generation cannot satisfy the requested counts."""


class DatasetError(SqlmemError):
    """A dataset file is malformed or fails validation on load."""
