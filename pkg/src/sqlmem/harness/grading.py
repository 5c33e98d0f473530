"""Reply grading against oracle answer specs.

The designated answer field is the text after the last ``answer:`` line of
a reply (the rule planner always emits one; the LLM summarizer is asked
to). When no such line exists the whole reply is searched instead, with
slightly laxer categorical matching, since prose replies rarely equal the
canonical string exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..fruitshop.questions import AnswerSpec, Categorical, DateAnswer, Numeric

_ANSWER_LINE_RE = re.compile(r"answer:\s*(.+)", re.IGNORECASE)
_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")
_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}")


@dataclass(frozen=True)
class Verdict:
    correct: bool
    extracted: str
    reason: str


def extract_answer_field(reply: str) -> tuple[str, bool]:
    """Return (field text, had_answer_line)."""
    matches = _ANSWER_LINE_RE.findall(reply)
    if matches:
        return matches[-1].strip(), True
    return reply.strip(), False


def grade(reply: str, spec: AnswerSpec) -> Verdict:
    """Compare a reply with the oracle's answer spec."""
    field, designated = extract_answer_field(reply)

    if isinstance(spec, Numeric):
        m = _NUMBER_RE.search(field)
        if m is None:
            return Verdict(False, "", "no number found in answer field")
        value = float(m.group(0))
        ok = abs(value - spec.value) <= spec.tolerance
        return Verdict(ok, m.group(0), f"|{value} - {spec.value}| vs tol {spec.tolerance}")

    if isinstance(spec, DateAnswer):
        m = _DATE_RE.search(field)
        if m is None:
            return Verdict(False, "", "no date found in answer field")
        ok = m.group(0).strip().lower() == spec.value.strip().lower()
        return Verdict(ok, m.group(0), f"{m.group(0)} vs {spec.value}")

    if isinstance(spec, Categorical):
        got = field.strip().lower()
        want = spec.value.strip().lower()
        if designated:
            ok = got == want
        else:
            ok = want in got
        return Verdict(ok, field.strip(), f"{field.strip()!r} vs {spec.value!r}")

    raise TypeError(f"not an answer spec: {spec!r}")
