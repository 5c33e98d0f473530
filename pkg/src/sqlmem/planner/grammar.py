"""Plan text grammar: ``StepN: description`` lines with fenced SQL blocks.

The canonical form::

    Step1: Find the sale_id for this customer on this date
    ```sql
    SELECT sale_id FROM sales WHERE ...;
    ```

    Step2: ...

Prose outside step blocks is tolerated on parse (model completions often
lead with a sentence) but the renderer emits only the canonical form, and
``normalize_plan_text`` maps any canonical-content text onto it.
"""

from __future__ import annotations

import re

from ..engine import MemoryStep
from ..errors import PlanParseError

STEP_HEADER_RE = re.compile(r"^Step(\d+):\s*(.*\S)\s*$")
FENCE_OPEN_RE = re.compile(r"^```sql\s*$")
FENCE_CLOSE_RE = re.compile(r"^```\s*$")


def parse_plan_text(text: str) -> list[MemoryStep]:
    """Parse plan text into steps (llm_resolved, bindings left empty)."""
    lines = text.splitlines()
    steps: list[MemoryStep] = []
    i = 0
    n = len(lines)
    while i < n:
        header = STEP_HEADER_RE.match(lines[i])
        if header is None:
            if steps and FENCE_OPEN_RE.match(lines[i]):
                raise PlanParseError("sql block without a step header", i + 1)
            i += 1  # prose outside steps is ignored
            continue
        index = int(header.group(1))
        expected = len(steps) + 1
        if index != expected:
            raise PlanParseError(f"expected Step{expected}, got Step{index}", i + 1)
        description = header.group(2)
        i += 1
        while i < n and not lines[i].strip():
            i += 1
        if i >= n or not FENCE_OPEN_RE.match(lines[i]):
            raise PlanParseError(f"Step{index} is not followed by a ```sql block", i + 1)
        i += 1
        sql_lines: list[str] = []
        while i < n and not FENCE_CLOSE_RE.match(lines[i]):
            sql_lines.append(lines[i].rstrip())
            i += 1
        if i >= n:
            raise PlanParseError(f"unterminated sql block in Step{index}", i)
        i += 1
        template = "\n".join(sql_lines).strip("\n")
        if not template.strip():
            raise PlanParseError(f"Step{index} has an empty sql block", i)
        steps.append(
            MemoryStep(index=index, description=description, sql_template=template, llm_resolved=True)
        )
    if not steps:
        raise PlanParseError("no Step lines found", 1)
    return steps


def render_plan_text(steps) -> str:
    """Render steps in the canonical plan form (inverse of parse)."""
    blocks = [
        f"Step{s.index}: {s.description}\n```sql\n{s.sql_template}\n```" for s in steps
    ]
    return "\n\n".join(blocks) + "\n"


def normalize_plan_text(text: str) -> str:
    """Whitespace-canonical form: stripped lines, single blank separators."""
    lines = [line.rstrip() for line in text.splitlines()]
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    out: list[str] = []
    for line in lines:
        if not line and out and not out[-1]:
            continue
        out.append(line)
    return "\n".join(out) + "\n"
