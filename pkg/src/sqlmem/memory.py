"""Relational symbolic memory over sqlite3.

One MemoryHandle owns one isolated database (in-memory by default, file
backed when given a path). The handle executes single SQL statements from
the pinned subset, produces canonical dumps, and supports logical
snapshot/rollback with byte-exact restoration.

Handles are single-writer and strictly sequential; they may be handed from
one thread to another but never used from two at once.
"""

from __future__ import annotations

import itertools
import re
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ExecError, InitError, RollbackError, SchemaError
from .schema import SchemaSet, TableSchema
from .sqltext import split_statements, statement_kind

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_handle_serial = itertools.count(1)


@dataclass(frozen=True)
class SqlStatement:
    """A single SQL statement; kind derives from the leading keyword."""

    text: str

    @property
    def kind(self) -> str:
        return statement_kind(self.text)


@dataclass(frozen=True)
class ResultTable:
    """Typed columnar result of one statement.

    For writes ``columns`` and ``rows`` are empty and ``rows_affected``
    carries the count.
    """

    columns: tuple[tuple[str, str], ...] = ()
    rows: tuple[tuple, ...] = ()
    rows_affected: int = 0

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(name for name, _t in self.columns)

    def column_index(self, name: str) -> int:
        for i, (col, _t) in enumerate(self.columns):
            if col == name:
                return i
        raise KeyError(name)

    def scalar(self):
        """The single value of a 1x1 result."""
        return self.rows[0][0]


@dataclass(frozen=True)
class SnapshotId:
    label: str
    sequence: int
    origin: int = field(default=0, compare=True)


def _infer_type(values: list) -> str:
    """Best-effort semantic type of a result column from its values."""
    non_null = [v for v in values if v is not None]
    if not non_null:
        return "text"
    if all(isinstance(v, bool) or isinstance(v, int) for v in non_null):
        return "integer"
    if all(isinstance(v, (int, float)) for v in non_null):
        return "decimal(10,2)"
    if all(isinstance(v, str) and _DATE_RE.match(v) for v in non_null):
        return "date"
    return "text"


def _sql_type(semantic: str) -> str:
    return semantic.upper()


def _create_table_sql(table: TableSchema, autoincrement: bool) -> str:
    lines = []
    for col in table.columns:
        if col.name == table.primary_key:
            suffix = " PRIMARY KEY AUTOINCREMENT" if autoincrement else " PRIMARY KEY"
            lines.append(f"  {col.name} INTEGER{suffix}")
        else:
            null = "" if col.nullable else " NOT NULL"
            lines.append(f"  {col.name} {_sql_type(col.type)}{null}")
    for fk in table.foreign_keys:
        ref_table, _, ref_col = fk.references.partition(".")
        lines.append(f"  FOREIGN KEY ({fk.column}) REFERENCES {ref_table}({ref_col})")
    body = ",\n".join(lines)
    return f"CREATE TABLE {table.name} (\n{body}\n);"


class MemoryHandle:
    """Session-scoped connection to one database instance."""

    def __init__(self, schema: SchemaSet, conn: sqlite3.Connection):
        self.schema = schema
        self._conn = conn
        self._snapshots: dict[int, sqlite3.Connection] = {}
        self._snapshot_seq = 0
        self._serial = next(_handle_serial)
        self._closed = False

    # -- execution ----------------------------------------------------------

    def execute(self, stmt: SqlStatement | str) -> ResultTable:
        """Execute one statement; reads return rows, writes return a count."""
        self._check_open()
        text = stmt.text if isinstance(stmt, SqlStatement) else stmt
        pieces = split_statements(text)
        if len(pieces) != 1:
            raise ExecError(text, f"expected a single statement, got {len(pieces)}")
        text = pieces[0]
        try:
            kind = statement_kind(text)
        except ValueError as exc:
            raise ExecError(text, str(exc)) from exc
        try:
            cursor = self._conn.execute(text)
        except sqlite3.Error as exc:
            raise ExecError(text, str(exc)) from exc
        if kind == "read":
            rows = [tuple(row) for row in cursor.fetchall()]
            names = [desc[0] for desc in cursor.description or []]
            columns = tuple(
                (name, _infer_type([row[i] for row in rows])) for i, name in enumerate(names)
            )
            return ResultTable(columns=columns, rows=tuple(rows))
        return ResultTable(rows_affected=max(cursor.rowcount, 0))

    # -- snapshots -----------------------------------------------------------

    def snapshot(self, label: str = "") -> SnapshotId:
        """Capture the full logical state; ids are strictly increasing."""
        self._check_open()
        self._snapshot_seq += 1
        copy = sqlite3.connect(":memory:", check_same_thread=False)
        self._conn.backup(copy)
        self._snapshots[self._snapshot_seq] = copy
        return SnapshotId(label=label, sequence=self._snapshot_seq, origin=self._serial)

    def rollback(self, snap: SnapshotId) -> None:
        """Restore the exact state at ``snap``; later snapshots become invalid."""
        self._check_open()
        if snap.origin != self._serial or snap.sequence not in self._snapshots:
            raise RollbackError(f"unknown snapshot {snap.label!r} (seq {snap.sequence})")
        self._snapshots[snap.sequence].backup(self._conn)
        for seq in [s for s in self._snapshots if s > snap.sequence]:
            self._snapshots.pop(seq).close()

    # -- introspection -------------------------------------------------------

    def dump(self) -> str:
        """Canonical deterministic serialization of the whole database.

        Tables appear in schema order, rows ordered by primary key, decimal
        columns at fixed scale 2, NULL as the literal ``NULL``.
        """
        from .render import format_decimal_fixed  # local import, avoids cycle

        self._check_open()
        sections = []
        for table in self.schema.tables:
            names = [c.name for c in table.columns]
            lines = [f"== {table.name} ==", " | ".join(names)]
            cursor = self._conn.execute(
                f"SELECT {', '.join(names)} FROM {table.name} ORDER BY {table.primary_key}"
            )
            for row in cursor.fetchall():
                cells = []
                for col, value in zip(table.columns, row):
                    if value is None:
                        cells.append("NULL")
                    elif col.type == "decimal(10,2)":
                        cells.append(format_decimal_fixed(value))
                    else:
                        cells.append(str(value))
                lines.append(" | ".join(cells))
            sections.append("\n".join(lines))
        return "\n".join(sections) + ("\n" if sections else "")

    def describe_schema(self) -> str:
        """CREATE-TABLE listing plus one plain-language line per table."""
        self._check_open()
        if not self.schema.tables:
            return "no tables"
        parts = [_create_table_sql(t, autoincrement=False) for t in self.schema.tables]
        notes = []
        for t in self.schema.tables:
            desc = t.description or f"rows keyed by {t.primary_key}"
            notes.append(f"-- {t.name}: {desc}")
        notes.append("-- all *_id primary keys auto-increment; do not insert them explicitly")
        return "\n\n".join(parts) + "\n\n" + "\n".join(notes)

    def table_names(self) -> list[str]:
        return [t.name for t in self.schema.tables]

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        for conn in self._snapshots.values():
            conn.close()
        self._snapshots.clear()
        self._conn.close()

    def _check_open(self) -> None:
        if self._closed:
            raise ExecError("<none>", "handle is closed")


def init_schema(schema: SchemaSet, path: str | Path | None = None) -> MemoryHandle:
    """Create all tables of ``schema`` in a fresh database and return a handle."""
    try:
        schema.validate()
    except SchemaError as exc:
        raise InitError(str(exc)) from exc
    target = ":memory:" if path is None else str(path)
    try:
        conn = sqlite3.connect(target, check_same_thread=False)
        conn.isolation_level = None  # autocommit; snapshot/rollback need no open txn
        conn.execute("PRAGMA foreign_keys = ON")
        for table in schema.tables:
            conn.execute(_create_table_sql(table, autoincrement=True))
    except sqlite3.Error as exc:
        raise InitError(str(exc)) from exc
    return MemoryHandle(schema, conn)


def open_existing(schema: SchemaSet, path: str | Path) -> MemoryHandle:
    """Open a previously initialized database file with its known schema."""
    schema.validate()
    try:
        conn = sqlite3.connect(str(path), check_same_thread=False)
        conn.isolation_level = None
        conn.execute("PRAGMA foreign_keys = ON")
    except sqlite3.Error as exc:
        raise InitError(str(exc)) from exc
    return MemoryHandle(schema, conn)
