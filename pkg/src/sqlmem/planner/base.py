"""Planner interface and shared planner types.

A planner converts user input plus a schema description into either a
direct reply or a plan of memory steps, rewrites steps that depend on
prior results (LLM path), and summarizes a finished trace into the reply
the user sees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Protocol, Union, runtime_checkable

from ..engine import ExecutionTrace, MemoryStep, UserInput
from ..memory import SqlStatement


@dataclass(frozen=True)
class DirectReply:
    """Planner answered without touching memory."""

    text: str


@dataclass(frozen=True)
class Plan:
    steps: tuple[MemoryStep, ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a plan must have at least one step")
        for i, step in enumerate(self.steps, start=1):
            if step.index != i:
                raise ValueError(f"step indices must be contiguous from 1, got {step.index} at {i}")


PlannerOutput = Union[DirectReply, Plan]


@dataclass(frozen=True)
class PlannerConfig:
    mode: str = "rule"  # rule | llm
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.0
    max_steps: int = 12
    exemplar_set: str = "fruit-shop"
    token_budget: int = 3500
    api_key_env: str = "SQLMEM_API_KEY"
    retries: int = 2
    timeout: float = 30.0

    def validate(self) -> None:
        if self.mode not in ("rule", "llm"):
            raise ValueError(f"unknown planner mode {self.mode!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.mode == "llm" and not self.endpoint:
            raise ValueError("llm mode requires an endpoint URL")

    @classmethod
    def from_file(cls, path: str | Path) -> "PlannerConfig":
        data = json.loads(Path(path).read_text())
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown planner config keys: {sorted(unknown)}")
        config = cls(**data)
        config.validate()
        return config

    def with_overrides(self, **overrides) -> "PlannerConfig":
        """Apply CLI-style overrides; None values are ignored."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(updates) - set(self.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown planner config keys: {sorted(unknown)}")
        config = replace(self, **updates)
        config.validate()
        return config


@runtime_checkable
class Planner(Protocol):
    config: PlannerConfig

    def plan(self, input: UserInput, schema_desc: str) -> PlannerOutput: ...

    def update_operation(self, step: MemoryStep, prior: ExecutionTrace) -> list[SqlStatement]: ...

    def summarize(self, input: UserInput, trace: ExecutionTrace) -> str: ...
