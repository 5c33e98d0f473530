from __future__ import annotations

import pytest

from sqlmem.errors import PlanParseError
from sqlmem.planner.grammar import normalize_plan_text, parse_plan_text, render_plan_text
from sqlmem.planner.llm import load_exemplars

SALE_PLAN_TEXT = """\
Step1: Insert customer 'Bob Smith' if not exists
```sql
INSERT INTO customers (first_name, last_name, phone_number, email)
SELECT 'Bob', 'Smith', '123-456-7893', 'bob.smith@example.com'
WHERE NOT EXISTS (SELECT 1 FROM customers WHERE phone_number = '123-456-7893');
```

Step2: Insert sale
```sql
INSERT INTO sales (customer_id, sale_date, total_price)
VALUES ((SELECT customer_id FROM customers WHERE phone_number = '123-456-7893'), '2023-01-02', (SELECT selling_price FROM fruits WHERE fruit_name = 'apple') * 9);
```

Step3: Insert sale item
```sql
INSERT INTO sale_items (sale_id, fruit_id, quantity_sold, price_per_item, item_total_price)
VALUES ((SELECT MAX(sale_id) FROM sales), (SELECT fruit_id FROM fruits WHERE fruit_name = 'apple'), 9, (SELECT selling_price FROM fruits WHERE fruit_name = 'apple'), (SELECT selling_price FROM fruits WHERE fruit_name = 'apple') * 9);
```

Step4: Update the stock quantity of apple and cherry
```sql
UPDATE fruits
SET stock_quantity = CASE
    WHEN fruit_name = 'apple' THEN stock_quantity - 9
    WHEN fruit_name = 'cherry' THEN stock_quantity - 4
    ELSE stock_quantity
END
WHERE fruit_name IN ('apple', 'cherry');
```
"""


def test_parse_four_step_sale_plan():
    steps = parse_plan_text(SALE_PLAN_TEXT)
    assert len(steps) == 4
    assert steps[0].description == "Insert customer 'Bob Smith' if not exists"
    assert "CASE" in steps[3].sql_template
    assert all(s.llm_resolved for s in steps)
    assert all(s.bindings == () for s in steps)


def test_parse_records_placeholder_tokens():
    text = "Step1: Delete\n```sql\nDELETE FROM sales WHERE sale_id = <sale_id>;\n```\n"
    steps = parse_plan_text(text)
    assert steps[0].placeholders() == ["sale_id"]


def test_text_without_step_lines_is_parse_error():
    with pytest.raises(PlanParseError) as exc_info:
        parse_plan_text("no steps here\njust prose\n")
    assert exc_info.value.line == 1


def test_non_contiguous_indices_rejected():
    text = "Step1: a\n```sql\nSELECT 1;\n```\n\nStep3: b\n```sql\nSELECT 2;\n```\n"
    with pytest.raises(PlanParseError):
        parse_plan_text(text)


def test_step_without_fence_rejected():
    with pytest.raises(PlanParseError):
        parse_plan_text("Step1: a\nSELECT 1;\n")


def test_unterminated_fence_rejected():
    with pytest.raises(PlanParseError):
        parse_plan_text("Step1: a\n```sql\nSELECT 1;\n")


def test_leading_prose_is_ignored():
    text = "Begin to interact with the database.\n\n" + SALE_PLAN_TEXT
    assert len(parse_plan_text(text)) == 4


def test_render_parse_round_trip():
    steps = parse_plan_text(SALE_PLAN_TEXT)
    rendered = render_plan_text(steps)
    assert rendered == normalize_plan_text(SALE_PLAN_TEXT)
    assert parse_plan_text(rendered) == steps


def test_shipped_exemplars_round_trip():
    exemplars = load_exemplars("fruit-shop")
    assert len(exemplars) >= 7
    for ex in exemplars:
        steps = parse_plan_text(ex.plan_text)
        assert render_plan_text(steps) == normalize_plan_text(ex.plan_text), ex.name


def test_normalize_collapses_blank_runs():
    messy = "Step1: a\n```sql\nSELECT 1;\n```\n\n\n\nStep2: b\n```sql\nSELECT 2;\n```\n"
    normalized = normalize_plan_text(messy)
    assert "\n\n\n" not in normalized
    assert parse_plan_text(normalized) == parse_plan_text(messy)
