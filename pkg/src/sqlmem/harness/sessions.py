"""Session registry for the REPL and HTTP service.

A session binds one memory handle, one planner, and one trace log. With a
state directory each session persists as::

    {state_dir}/{session_id}/memory.db      # the database itself
    {state_dir}/{session_id}/traces.jsonl   # append-only trace log
    {state_dir}/{session_id}/meta.json      # planner mode, turn counter

Restarting a manager over the same directory restores table contents and
trace history exactly. Snapshot handles live for the session only (they
are in-memory copies); the persistence contract covers reads.

Within a session everything is strictly serial: ``begin_message`` hands out
the per-session lock non-blockingly so callers can map "busy" to HTTP 409.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

from ..engine import UserInput, run_turn
from ..errors import RollbackError, SqlmemError
from ..memory import MemoryHandle, SnapshotId, init_schema, open_existing
from ..planner import make_planner
from ..planner.base import PlannerConfig
from ..render import format_cell
from ..schema import fruit_shop_schema


class NotFound(SqlmemError):
    pass


class SessionBusy(SqlmemError):
    pass


class Session:
    def __init__(self, session_id: str, handle: MemoryHandle, planner, directory: Path | None):
        self.id = session_id
        self.handle = handle
        self.planner = planner
        self.directory = directory
        self.traces: list[dict] = []
        self.snapshots: dict[int, SnapshotId] = {}
        self.lock = threading.Lock()
        if directory is not None:
            trace_path = directory / "traces.jsonl"
            if trace_path.exists():
                self.traces = [
                    json.loads(line)
                    for line in trace_path.read_text().splitlines()
                    if line.strip()
                ]

    @property
    def next_turn(self) -> int:
        return len(self.traces) + 1

    def append_trace(self, doc: dict) -> None:
        self.traces.append(doc)
        if self.directory is not None:
            with (self.directory / "traces.jsonl").open("a") as fh:
                fh.write(json.dumps(doc) + "\n")

    def close(self) -> None:
        self.handle.close()


class SessionManager:
    """Creates, restores and serves sessions; thread-safe registry."""

    def __init__(self, state_dir: str | Path | None = None, planner_config: PlannerConfig | None = None):
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self.default_config = planner_config or PlannerConfig(mode="rule")
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        if self.state_dir is not None:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            self._restore_existing()

    def _restore_existing(self) -> None:
        for meta_path in sorted(self.state_dir.glob("*/meta.json")):
            directory = meta_path.parent
            meta = json.loads(meta_path.read_text())
            config = self.default_config.with_overrides(**meta.get("planner", {}))
            handle = open_existing(fruit_shop_schema(), directory / "memory.db")
            session = Session(directory.name, handle, make_planner(config), directory)
            self.sessions[session.id] = session

    def create(self, planner_overrides: dict | None = None) -> Session:
        config = self.default_config.with_overrides(**(planner_overrides or {}))
        session_id = f"s{uuid.uuid4().hex[:12]}"
        directory = None
        if self.state_dir is not None:
            directory = self.state_dir / session_id
            directory.mkdir(parents=True)
            (directory / "meta.json").write_text(
                json.dumps({"planner": planner_overrides or {}}) + "\n"
            )
            handle = init_schema(fruit_shop_schema(), directory / "memory.db")
        else:
            handle = init_schema(fruit_shop_schema())
        session = Session(session_id, handle, make_planner(config), directory)
        with self._registry_lock:
            self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFound(session_id)
        return session

    # -- operations -----------------------------------------------------------

    def message(self, session_id: str, text: str) -> dict:
        """Run one turn; raises SessionBusy when one is already in flight."""
        session = self.get(session_id)
        if not session.lock.acquire(blocking=False):
            raise SessionBusy(session_id)
        try:
            turn = session.next_turn
            trace = run_turn(UserInput(text=text, turn_id=turn), session.planner, session.handle)
            doc = trace.to_dict()
            session.append_trace(doc)
            return doc
        finally:
            session.lock.release()

    def tables(self, session_id: str) -> list[str]:
        return self.get(session_id).handle.table_names()

    def table_rows(self, session_id: str, table: str, limit: int = 50) -> dict:
        session = self.get(session_id)
        schema = session.handle.schema
        try:
            table_schema = schema.table(table)
        except KeyError:
            raise NotFound(f"table {table}") from None
        names = [c.name for c in table_schema.columns]
        result = session.handle.execute(
            f"SELECT {', '.join(names)} FROM {table} "
            f"ORDER BY {table_schema.primary_key} LIMIT {int(limit)}"
        )
        count = session.handle.execute(f"SELECT COUNT(*) AS n FROM {table}").scalar()
        return {
            "table": table,
            "columns": names,
            "rows": [[format_cell(v) for v in row] for row in result.rows],
            "row_count": int(count),
        }

    def snapshot(self, session_id: str, label: str = "") -> dict:
        session = self.get(session_id)
        snap = session.handle.snapshot(label)
        session.snapshots[snap.sequence] = snap
        return {"label": snap.label, "sequence": snap.sequence}

    def rollback(self, session_id: str, sequence: int) -> dict:
        session = self.get(session_id)
        snap = session.snapshots.get(sequence)
        if snap is None:
            raise RollbackError(f"unknown snapshot sequence {sequence}")
        session.handle.rollback(snap)
        for seq in [s for s in session.snapshots if s > sequence]:
            del session.snapshots[seq]
        return {"ok": True, "sequence": sequence}

    def trace(self, session_id: str, turn: int) -> dict:
        session = self.get(session_id)
        if not 1 <= turn <= len(session.traces):
            raise NotFound(f"turn {turn}")
        return session.traces[turn - 1]

    def close(self) -> None:
        for session in self.sessions.values():
            session.close()
        self.sessions.clear()
