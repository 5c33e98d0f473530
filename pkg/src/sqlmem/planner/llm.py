"""Remote planner over a chat-completions style HTTP endpoint.

Wire protocol (lowest common denominator across providers): POST to the
configured URL with ``{"model", "messages": [system, user], "temperature"}``
and read ``choices[0].message.content`` from the JSON response. The API key
comes only from the environment variable named in the config and is sent as
a bearer token when present.

Prompts are assembled as role preamble + schema description + exemplars +
input. A character/4 token estimate keeps them under the configured budget
(checked by tests over the shipped exemplar set; oversize prompts log a
warning but are still sent).
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass
from importlib import resources

import httpx

from ..engine import ExecutionTrace, MemoryStep, UserInput
from ..errors import PlanParseError, RemoteError
from ..memory import SqlStatement
from ..render import render_result
from .base import DirectReply, Plan, PlannerConfig, PlannerOutput
from .grammar import parse_plan_text

logger = logging.getLogger(__name__)

PLAN_PREAMBLE = """\
You are the controller of a shop bookkeeping system backed by a relational
database. For every user message decide whether the database is needed.

If it is NOT needed, reply with a single line:
REPLY: <your answer>

If it IS needed, produce a plan and nothing else, in exactly this form:
Step1: <short description>
```sql
<one or more SQL statements separated by ;>
```

Step2: ...

Rules:
- Use only INSERT, UPDATE, DELETE and SELECT statements against the tables
  described below.
- When a later step needs values from an earlier step's results, write
  <name> placeholders (for example <sale_id>) and say so in the step
  description; they will be filled in after the earlier steps run.
- Keep plans minimal: no step that is not required to answer or record.
- Never invent id values; look them up with subqueries or placeholders.
"""

UPDATE_PREAMBLE = """\
You update one step of a database plan. Replace every <name> placeholder
in the SQL below with concrete values taken from the prior results. If a
result has several rows, repeat the statement once per row. Output only
SQL statements separated by semicolons, no prose, no code fences.
"""

SUMMARY_PREAMBLE = """\
You summarize the outcome of database operations for the user. Answer in
one or two sentences. If the user asked a question, end your reply with a
final line of the form:
answer: <the value, exactly as it appears in the last result>
"""


def estimate_tokens(text: str) -> int:
    """Crude chars/4 token estimate; good enough for budget checks."""
    return (len(text) + 3) // 4


@dataclass(frozen=True)
class Exemplar:
    name: str
    input_text: str
    plan_text: str


def load_exemplars(set_id: str) -> list[Exemplar]:
    """Load the named exemplar set from package data.

    Files are ``exemplars/{set_id}__{name}.txt`` with ``== input ==`` and
    ``== plan ==`` sections; every plan must parse in the step grammar.
    """
    root = resources.files("sqlmem").joinpath("planner/exemplars")
    out: list[Exemplar] = []
    prefix = f"{set_id}__"
    names = sorted(p.name for p in root.iterdir() if p.name.startswith(prefix))
    for filename in names:
        text = root.joinpath(filename).read_text()
        m = re.match(r"== input ==\n(.*?)\n== plan ==\n(.*)$", text, re.DOTALL)
        if m is None:
            raise ValueError(f"exemplar {filename} lacks input/plan sections")
        input_text, plan_text = m.group(1).strip(), m.group(2).strip() + "\n"
        parse_plan_text(plan_text)  # invariant: every exemplar parses
        out.append(Exemplar(filename[len(prefix) : -4], input_text, plan_text))
    if not out:
        raise ValueError(f"no exemplars found for set {set_id!r}")
    return out


class LlmPlanner:
    """Planner backed by a remote model; safe to share across sessions."""

    def __init__(self, config: PlannerConfig, transport: httpx.BaseTransport | None = None):
        config.validate()
        if config.mode != "llm":
            raise ValueError("LlmPlanner requires mode='llm'")
        self.config = config
        self.exemplars = load_exemplars(config.exemplar_set)
        self._client = httpx.Client(transport=transport, timeout=config.timeout)

    # -- prompt assembly ------------------------------------------------------

    def build_plan_prompt(self, input: UserInput, schema_desc: str) -> tuple[str, str]:
        blocks = [schema_desc, ""]
        for ex in self.exemplars:
            blocks.append(f"User input: {ex.input_text}")
            blocks.append("Plan:")
            blocks.append(ex.plan_text)
        blocks.append(f"User input: {input.text}")
        blocks.append("Plan:")
        user = "\n".join(blocks)
        self._check_budget(PLAN_PREAMBLE + user)
        return PLAN_PREAMBLE, user

    def build_update_prompt(self, step: MemoryStep, prior: ExecutionTrace) -> tuple[str, str]:
        blocks = ["Prior steps and results:"]
        for executed in prior.steps:
            blocks.append(f"Step{executed.step.index}: {executed.step.description}")
            for stmt, result in zip(executed.resolved_statements, executed.results):
                blocks.append(stmt.text)
                blocks.append("Database response:")
                blocks.append(render_result(result))
        blocks.append("")
        blocks.append(f"Step to update: Step{step.index}: {step.description}")
        blocks.append(step.sql_template)
        return UPDATE_PREAMBLE, "\n".join(blocks)

    def build_summary_prompt(self, input: UserInput, trace: ExecutionTrace) -> tuple[str, str]:
        blocks = [f"User input: {input.text}", ""]
        for executed in trace.steps:
            blocks.append(f"Step{executed.step.index}: {executed.step.description}")
            for stmt, result in zip(executed.resolved_statements, executed.results):
                blocks.append(stmt.text)
                blocks.append("Database response:")
                blocks.append(render_result(result))
        if trace.error is not None:
            blocks.append(f"The turn failed at step {trace.error.step_index}: {trace.error.message}")
        return SUMMARY_PREAMBLE, "\n".join(blocks)

    def _check_budget(self, prompt: str) -> None:
        estimate = estimate_tokens(prompt)
        if estimate > self.config.token_budget:
            logger.warning(
                "prompt estimate %d exceeds budget %d", estimate, self.config.token_budget
            )

    # -- planner protocol ------------------------------------------------------

    def plan(self, input: UserInput, schema_desc: str) -> PlannerOutput:
        system, user = self.build_plan_prompt(input, schema_desc)
        completion = self._complete(system, user)
        stripped = completion.strip()
        if stripped.upper().startswith("REPLY:"):
            return DirectReply(stripped[len("REPLY:") :].strip())
        steps = parse_plan_text(stripped)
        if len(steps) > self.config.max_steps:
            raise PlanParseError(
                f"plan has {len(steps)} steps, limit is {self.config.max_steps}", 1
            )
        return Plan(steps=tuple(steps))

    def update_operation(self, step: MemoryStep, prior: ExecutionTrace) -> list[SqlStatement]:
        system, user = self.build_update_prompt(step, prior)
        completion = _strip_fences(self._complete(system, user))
        from ..sqltext import split_statements

        statements = split_statements(completion)
        if not statements:
            raise PlanParseError("update produced no SQL statements", 1)
        return [SqlStatement(s) for s in statements]

    def summarize(self, input: UserInput, trace: ExecutionTrace) -> str:
        system, user = self.build_summary_prompt(input, trace)
        return self._complete(system, user).strip()

    # -- transport -------------------------------------------------------------

    def _complete(self, system: str, user: str) -> str:
        messages = [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ]
        return complete_chat(self._client, self.config, messages)


def complete_chat(client: httpx.Client, config: PlannerConfig, messages: list[dict]) -> str:
    """One chat completion over the wire protocol, with retries on 5xx/transport."""
    payload = {
        "model": config.model,
        "messages": messages,
        "temperature": config.temperature,
    }
    headers = {}
    api_key = os.environ.get(config.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    last_error = ""
    for attempt in range(config.retries + 1):
        try:
            response = client.post(config.endpoint, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            last_error = f"transport error: {exc}"
            continue
        if response.status_code >= 500:
            last_error = f"server error {response.status_code}"
            continue
        if response.status_code != 200:
            raise RemoteError(f"endpoint returned {response.status_code}", attempt)
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise RemoteError(f"malformed completion response: {exc}", attempt) from exc
    raise RemoteError(last_error or "request failed", config.retries)


def _strip_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        first_newline = text.find("\n")
        if first_newline != -1:
            text = text[first_newline + 1 :]
        if text.rstrip().endswith("```"):
            text = text.rstrip()[:-3]
    return text.strip()
