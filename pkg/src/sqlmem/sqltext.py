"""Small SQL-text utilities: statement splitting, kind detection, placeholders.

Everything here is plain string processing over the pinned SQL subset.
Single-quoted strings (with '' escapes) and double-quoted identifiers are
respected; no attempt is made to parse SQL beyond that.
"""

from __future__ import annotations

import re

PLACEHOLDER_RE = re.compile(r"<([a-z_][a-z0-9_]*)>")

_READ_KEYWORDS = {"SELECT"}
_WRITE_KEYWORDS = {"INSERT", "UPDATE", "DELETE"}


def _scan_quotes(text: str):
    """Yield (index, char, in_string) for each character of ``text``."""
    quote: str | None = None
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if quote is None:
            if ch in ("'", '"'):
                quote = ch
            yield i, ch, quote is not None
        else:
            if ch == quote:
                # '' inside a string is an escaped quote, stay inside.
                if i + 1 < n and text[i + 1] == quote:
                    yield i, ch, True
                    i += 1
                    yield i, ch, True
                    i += 1
                    continue
                quote = None
            yield i, ch, True
        i += 1


def split_statements(text: str) -> list[str]:
    """Split a SQL block on top-level ``;`` into individual statements.

    Semicolons inside quoted strings do not split. Empty fragments are
    dropped; surrounding whitespace is stripped from each statement.
    """
    parts: list[str] = []
    start = 0
    for i, ch, in_string in _scan_quotes(text):
        if ch == ";" and not in_string:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts if p.strip()]


def find_placeholders(text: str) -> list[str]:
    """Return placeholder names appearing outside string literals, in order.

    Duplicates are kept de-duplicated (first occurrence wins); a literal
    ``<`` inside a quoted string never starts a token.
    """
    masked = mask_strings(text)
    seen: list[str] = []
    for match in PLACEHOLDER_RE.finditer(masked):
        name = match.group(1)
        if name not in seen:
            seen.append(name)
    return seen


def mask_strings(text: str) -> str:
    """Replace characters inside string literals with spaces (same length)."""
    out = list(text)
    for i, _ch, in_string in _scan_quotes(text):
        if in_string:
            out[i] = " "
    return "".join(out)


def statement_kind(text: str) -> str:
    """Classify a statement as ``read`` or ``write`` by its leading keyword.

    Raises ValueError for statements outside the pinned subset.
    """
    head = text.lstrip().split(None, 1)
    keyword = head[0].upper() if head else ""
    if keyword in _READ_KEYWORDS:
        return "read"
    if keyword in _WRITE_KEYWORDS:
        return "write"
    raise ValueError(f"statement outside the supported subset: {keyword or '<empty>'!r}")


def quote_literal(value: str) -> str:
    """Render a Python string as a single-quoted SQL literal."""
    return "'" + value.replace("'", "''") + "'"


def render_value(value) -> str:
    """Render a result value for substitution into a SQL template.

    Numbers are emitted bare; strings (incl. dates) are quoted; None
    becomes NULL.
    """
    if value is None:
        return "NULL"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, float)):
        return repr(value)
    return quote_literal(str(value))
