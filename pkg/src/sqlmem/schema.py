"""Declarative relational schemas: types, validation, file round-trip.

A schema document is plain JSON (see ``schemas/fruit_shop.json``)::

    {"format": "relational-schema", "version": 1, "tables": [...]}

Column types are semantic, not backend types: one of ``integer``,
``decimal(10,2)``, ``text``, ``date``. The backend adapter decides storage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import SchemaError

SCHEMA_FORMAT = "relational-schema"
SCHEMA_VERSION = 1

COLUMN_TYPES = ("integer", "decimal(10,2)", "text", "date")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    type: str
    nullable: bool = False


@dataclass(frozen=True)
class ForeignKey:
    column: str
    references: str  # "table.column"


@dataclass(frozen=True)
class TableSchema:
    name: str
    columns: tuple[ColumnSpec, ...]
    primary_key: str
    foreign_keys: tuple[ForeignKey, ...] = ()
    description: str = ""

    def column(self, name: str) -> ColumnSpec:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)


@dataclass(frozen=True)
class SchemaSet:
    tables: tuple[TableSchema, ...] = field(default_factory=tuple)

    def table(self, name: str) -> TableSchema:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def validate(self) -> None:
        """Check structural invariants; raises SchemaError on the first hole."""
        names = [t.name for t in self.tables]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate table name")
        by_name = {t.name: t for t in self.tables}
        for t in self.tables:
            col_names = [c.name for c in t.columns]
            if len(set(col_names)) != len(col_names):
                raise SchemaError(f"{t.name}: duplicate column name")
            for c in t.columns:
                if c.type not in COLUMN_TYPES:
                    raise SchemaError(f"{t.name}.{c.name}: unknown type {c.type!r}")
            if t.primary_key not in col_names:
                raise SchemaError(f"{t.name}: primary key {t.primary_key!r} is not a column")
            if t.column(t.primary_key).type != "integer":
                raise SchemaError(f"{t.name}: primary key must be an integer column")
            for fk in t.foreign_keys:
                if fk.column not in col_names:
                    raise SchemaError(f"{t.name}: FK column {fk.column!r} is not a column")
                ref_table, _, ref_col = fk.references.partition(".")
                target = by_name.get(ref_table)
                if target is None:
                    raise SchemaError(
                        f"{t.name}.{fk.column}: references missing table {ref_table!r}"
                    )
                if ref_col != target.primary_key:
                    raise SchemaError(
                        f"{t.name}.{fk.column}: must reference {ref_table}'s primary key"
                    )

    def to_document(self) -> dict:
        return {
            "format": SCHEMA_FORMAT,
            "version": SCHEMA_VERSION,
            "tables": [
                {
                    "name": t.name,
                    "description": t.description,
                    "primary_key": t.primary_key,
                    "columns": [
                        {"name": c.name, "type": c.type, "nullable": c.nullable}
                        for c in t.columns
                    ],
                    "foreign_keys": [
                        {"column": fk.column, "references": fk.references}
                        for fk in t.foreign_keys
                    ],
                }
                for t in self.tables
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SchemaSet":
        if doc.get("format") != SCHEMA_FORMAT:
            raise SchemaError(f"not a schema document: format={doc.get('format')!r}")
        tables = []
        for td in doc.get("tables", []):
            tables.append(
                TableSchema(
                    name=td["name"],
                    description=td.get("description", ""),
                    primary_key=td["primary_key"],
                    columns=tuple(
                        ColumnSpec(c["name"], c["type"], bool(c.get("nullable", False)))
                        for c in td["columns"]
                    ),
                    foreign_keys=tuple(
                        ForeignKey(f["column"], f["references"])
                        for f in td.get("foreign_keys", [])
                    ),
                )
            )
        schema = cls(tables=tuple(tables))
        schema.validate()
        return schema


def save_schema(schema: SchemaSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schema.to_document(), indent=2) + "\n")


def load_schema(path: str | Path) -> SchemaSet:
    return SchemaSet.from_document(json.loads(Path(path).read_text()))


def fruit_shop_schema() -> SchemaSet:
    """The seven-table fruit-shop schema, loaded from the shipped document."""
    text = resources.files("sqlmem").joinpath("schemas/fruit_shop.json").read_text()
    return SchemaSet.from_document(json.loads(text))
