"""Turn executor: resolve plan steps against prior results and run them.

A turn walks the planned steps in order. Each step's SQL template may carry
``<name>`` placeholders filled from earlier results, either through
structured bindings (mechanical substitution, used by the rule planner) or
by asking the planner to rewrite the step (LLM path). Both paths feed the
same splitting and execution machinery, and every statement sent to the
database lands in exactly one ExecutedStep of the returned trace.

Failure policy: the turn stops at the first failing step, the trace keeps
everything executed so far plus the error, and the reply is still produced
by the planner's summarizer. run_turn never raises for plan or step
failures; callers inspect ``trace.error``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import (
    AmbiguousScalar,
    EmptySource,
    ExecError,
    PlanParseError,
    RemoteError,
    UnresolvedPlaceholder,
    UnsupportedInput,
)
from .memory import MemoryHandle, ResultTable, SqlStatement
from .render import render_result
from .sqltext import (
    PLACEHOLDER_RE,
    find_placeholders,
    mask_strings,
    render_value,
    split_statements,
    statement_kind,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UserInput:
    text: str
    turn_id: int = 1

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("user input must be non-empty")


@dataclass(frozen=True)
class PlaceholderBinding:
    """Where a ``<name>`` token takes its value from.

    ``scalar`` substitutes the single value of the referenced column;
    ``per_row`` expands the template once per source row.
    """

    name: str
    source_step: int
    column: str
    mode: str = "scalar"  # scalar | per_row


@dataclass(frozen=True)
class MemoryStep:
    """One intermediate memory operation of a plan."""

    index: int
    description: str
    sql_template: str
    bindings: tuple[PlaceholderBinding, ...] = ()
    llm_resolved: bool = False

    def placeholders(self) -> list[str]:
        return find_placeholders(self.sql_template)


@dataclass
class ExecutedStep:
    step: MemoryStep
    resolved_statements: list[SqlStatement] = field(default_factory=list)
    results: list[ResultTable] = field(default_factory=list)
    note: str = ""

    def read_result(self) -> ResultTable | None:
        """The step's last read result, which later bindings draw from."""
        for result in reversed(self.results):
            if result.columns:
                return result
        return None


@dataclass
class TurnError:
    kind: str  # plan_error | step_error
    message: str
    step_index: int = 0


@dataclass
class ExecutionTrace:
    input: UserInput
    steps: list[ExecutedStep] = field(default_factory=list)
    reply: str = ""
    error: TurnError | None = None
    used_memory: bool = False

    def to_dict(self) -> dict:
        """Stable serialization consumed by the harness, service and UI."""
        return {
            "turn_id": self.input.turn_id,
            "input": self.input.text,
            "used_memory": self.used_memory,
            "steps": [
                {
                    "index": ex.step.index,
                    "description": ex.step.description,
                    "statements": [s.text for s in ex.resolved_statements],
                    "results": [render_result(r) for r in ex.results],
                    "note": ex.note,
                }
                for ex in self.steps
            ],
            "error": None
            if self.error is None
            else {
                "kind": self.error.kind,
                "step": self.error.step_index,
                "message": self.error.message,
            },
            "reply": self.reply,
        }


def _substitute(text: str, values: dict[str, object]) -> str:
    """Replace ``<name>`` tokens outside string literals with SQL literals."""
    masked = mask_strings(text)
    out: list[str] = []
    last = 0
    for match in PLACEHOLDER_RE.finditer(masked):
        name = match.group(1)
        if name not in values:
            continue
        out.append(text[last : match.start()])
        out.append(render_value(values[name]))
        last = match.end()
    out.append(text[last:])
    return "".join(out)


def _source_result(trace: ExecutionTrace, step: MemoryStep, binding: PlaceholderBinding) -> ResultTable:
    if not 1 <= binding.source_step < step.index:
        raise UnresolvedPlaceholder(binding.name)
    if binding.source_step > len(trace.steps):
        raise UnresolvedPlaceholder(binding.name)
    result = trace.steps[binding.source_step - 1].read_result()
    if result is None:
        raise EmptySource(binding.name, binding.source_step)
    return result


def resolve_step(step: MemoryStep, trace_so_far: ExecutionTrace) -> list[SqlStatement]:
    """Resolve a step's template into executable statements.

    Scalar bindings substitute a single value (exactly one source row);
    per-row bindings expand the template once per source row, rows taken
    positionally consistently when several per-row bindings share a source.
    """
    tokens = step.placeholders()
    bound = {b.name for b in step.bindings}
    for token in tokens:
        if token not in bound:
            raise UnresolvedPlaceholder(token)

    scalar_values: dict[str, object] = {}
    per_row: list[PlaceholderBinding] = []
    for binding in step.bindings:
        if binding.name not in tokens:
            continue
        if binding.mode == "per_row":
            per_row.append(binding)
            continue
        result = _source_result(trace_so_far, step, binding)
        if len(result.rows) == 0:
            raise EmptySource(binding.name, binding.source_step)
        if len(result.rows) > 1:
            raise AmbiguousScalar(binding.name, len(result.rows))
        scalar_values[binding.name] = result.rows[0][_column(result, binding)]

    if not per_row:
        text = _substitute(step.sql_template, scalar_values)
        return [SqlStatement(s) for s in split_statements(text)]

    sources = {b.source_step for b in per_row}
    if len(sources) != 1:
        raise ValueError("per-row bindings of one step must share a source step")
    result = _source_result(trace_so_far, step, per_row[0])
    if len(result.rows) == 0:
        raise EmptySource(per_row[0].name, per_row[0].source_step)

    statements: list[SqlStatement] = []
    for row in result.rows:
        values = dict(scalar_values)
        for binding in per_row:
            values[binding.name] = row[_column(result, binding)]
        text = _substitute(step.sql_template, values)
        statements.extend(SqlStatement(s) for s in split_statements(text))
    return statements


def _column(result: ResultTable, binding: PlaceholderBinding) -> int:
    try:
        return result.column_index(binding.column)
    except KeyError:
        raise ValueError(
            f"step {binding.source_step} result has no column {binding.column!r} "
            f"for placeholder <{binding.name}>"
        ) from None


def _is_write_fanout(step: MemoryStep) -> bool:
    """True when the step fans out per row and only writes (UPDATE/DELETE/INSERT)."""
    if not any(b.mode == "per_row" for b in step.bindings):
        return False
    templates = split_statements(step.sql_template)
    try:
        return bool(templates) and all(statement_kind(t) == "write" for t in templates)
    except ValueError:
        return False


def run_turn(input: UserInput, planner, handle: MemoryHandle) -> ExecutionTrace:
    """Process one user turn end to end and return its trace."""
    trace = ExecutionTrace(input=input)
    try:
        output = planner.plan(input, handle.describe_schema())
    except (PlanParseError, UnsupportedInput, RemoteError, ValueError) as exc:
        trace.error = TurnError(kind="plan_error", message=str(exc))
        trace.reply = _summarize(planner, input, trace)
        return trace

    from .planner.base import DirectReply  # local import: planner depends on this module

    if isinstance(output, DirectReply):
        trace.reply = output.text
        return trace

    trace.used_memory = True
    for step in output.steps:
        try:
            statements = _resolve(planner, step, trace)
        except EmptySource as exc:
            if _is_write_fanout(step):
                trace.steps.append(
                    ExecutedStep(step=step, note=f"no rows to act on ({exc})")
                )
                continue
            trace.error = TurnError(
                kind="step_error", message=f"empty source: {exc}", step_index=step.index
            )
            break
        except (UnresolvedPlaceholder, AmbiguousScalar, PlanParseError, RemoteError, ValueError) as exc:
            trace.error = TurnError(kind="step_error", message=str(exc), step_index=step.index)
            break

        executed = ExecutedStep(step=step)
        trace.steps.append(executed)
        failed = False
        for stmt in statements:
            try:
                result = handle.execute(stmt)
            except ExecError as exc:
                trace.error = TurnError(
                    kind="step_error", message=str(exc), step_index=step.index
                )
                failed = True
                break
            executed.resolved_statements.append(stmt)
            executed.results.append(result)
        if failed:
            break

    trace.reply = _summarize(planner, input, trace)
    return trace


def _resolve(planner, step: MemoryStep, trace: ExecutionTrace) -> list[SqlStatement]:
    if step.llm_resolved and not step.bindings and step.placeholders():
        return planner.update_operation(step, trace)
    return resolve_step(step, trace)


def _summarize(planner, input: UserInput, trace: ExecutionTrace) -> str:
    try:
        return planner.summarize(input, trace)
    except RemoteError as exc:
        logger.warning("summarizer failed: %s", exc)
        if trace.error is None:
            trace.error = TurnError(kind="step_error", message=str(exc))
        return f"(no summary available: {exc})"
