"""Relational symbolic memory for chat agents.

The package wires four layers together:

- ``memory``: an isolated relational store with execute, canonical dump,
  and snapshot/rollback.
- ``engine``: multi-step plan execution with placeholder substitution and
  per-row fan-out, producing a full trace per turn.
- ``planner``: the interchangeable intelligence layer (deterministic rule
  planner and a remote chat-completions planner).
- ``fruitshop`` + ``harness``: a synthetic shop workload with a brute-force
  ground-truth oracle, plus the CLI, evaluation and HTTP service on top.
"""

from .engine import (
    ExecutedStep,
    ExecutionTrace,
    MemoryStep,
    PlaceholderBinding,
    UserInput,
    resolve_step,
    run_turn,
)
from .memory import MemoryHandle, ResultTable, SnapshotId, SqlStatement, init_schema
from .render import render_result
from .schema import SchemaSet, fruit_shop_schema, load_schema, save_schema

__version__ = "0.1.0"

__all__ = [
    "ExecutedStep",
    "ExecutionTrace",
    "MemoryHandle",
    "MemoryStep",
    "PlaceholderBinding",
    "ResultTable",
    "SchemaSet",
    "SnapshotId",
    "SqlStatement",
    "UserInput",
    "__version__",
    "fruit_shop_schema",
    "init_schema",
    "load_schema",
    "render_result",
    "resolve_step",
    "run_turn",
    "save_schema",
]
