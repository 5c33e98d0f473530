"""Fixed-width ASCII rendering of query results, plus number formatting.

The table style matches the classic console client look::

    +---------------+
    | total_revenue |
    +---------------+
    |     707.0     |
    +---------------+

Cell text is deterministic: integers print bare, fractional values are
rounded half-up to two decimals and trailing zeros are trimmed down to one
decimal digit (707.00 -> "707.0", 9.9286 -> "9.93").
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal

from .memory import ResultTable


def format_decimal_fixed(value, scale: int = 2) -> str:
    """Format a number at a fixed scale with round-half-up ("39.40")."""
    quantum = Decimal(1).scaleb(-scale)
    return str(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def format_number(value) -> str:
    """Format a number for display: ints bare, floats at scale <= 2 trimmed."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    text = format_decimal_fixed(value, 2)
    if text.endswith("0") and not text.endswith(".0"):
        text = text[:-1]
    return text


def format_cell(value) -> str:
    """Render one result value as table-cell text."""
    if value is None:
        return "NULL"
    if isinstance(value, (int, float)):
        return format_number(value)
    return str(value)


def render_result(result: ResultTable) -> str:
    """Render a ResultTable as a bordered fixed-width ASCII table.

    Write results render as a one-line row count. Empty read results keep
    the header and note "(0 rows)".
    """
    if not result.columns:
        return f"({result.rows_affected} rows affected)"

    names = [name for name, _type in result.columns]
    cells = [[format_cell(v) for v in row] for row in result.rows]

    widths = []
    for i, name in enumerate(names):
        body = max((len(row[i]) for row in cells), default=0)
        widths.append(max(len(name), body))

    border = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    header = "|" + "|".join(f" {name.center(w)} " for name, w in zip(names, widths)) + "|"

    lines = [border, header, border]
    if not cells:
        lines.append("(0 rows)")
        return "\n".join(lines)

    # Right-align values within the column's widest value, then center that
    # field so number columns line up the way the classic clients print them.
    value_widths = [max(len(row[i]) for row in cells) for i in range(len(names))]
    for row in cells:
        padded = [
            row[i].rjust(value_widths[i]).center(widths[i]) for i in range(len(names))
        ]
        lines.append("|" + "|".join(f" {cell} " for cell in padded) + "|")
    lines.append(border)
    return "\n".join(lines)
