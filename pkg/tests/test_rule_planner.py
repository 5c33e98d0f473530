from __future__ import annotations

import pytest

from sqlmem.engine import UserInput, run_turn
from sqlmem.errors import UnsupportedInput
from sqlmem.planner.base import DirectReply, Plan
from sqlmem.planner.grammar import parse_plan_text, render_plan_text

from conftest import (
    F1_CHERRY_PURCHASE,
    F1_RETURN,
    F1_SALE,
    PRICE_CHANGE_TEXT,
    ingest,
)

SCHEMA_DESC = "(schema description unused by the rule planner)"


def _plan(rule_planner, text):
    output = rule_planner.plan(UserInput(text=text, turn_id=1), SCHEMA_DESC)
    assert isinstance(output, Plan)
    return output.steps


def test_cherry_purchase_is_six_steps_with_reference_descriptions(rule_planner):
    steps = _plan(rule_planner, F1_CHERRY_PURCHASE)
    assert [s.description for s in steps] == [
        "Insert supplier 'ABC' if not exists",
        "Insert fruit (set the selling price to NULL and stock quantity to 0) if not exists",
        "Insert purchase",
        "Insert purchase item",
        "Update the stock quantity of cherry",
        "Update the selling price of cherry if given new selling price",
    ]
    assert "24 * 0.8" in steps[2].sql_template
    assert "selling_price = 1.3" in steps[5].sql_template


def test_sale_plan_matches_reference_shape(rule_planner):
    steps = _plan(rule_planner, F1_SALE)
    assert [s.description for s in steps] == [
        "Insert customer 'Bob Smith' if not exists",
        "Insert sale",
        "Insert sale items",
        "Update the stock quantity of apple and cherry",
    ]
    assert "WHERE NOT EXISTS (SELECT 1 FROM customers WHERE phone_number = '123-456-7893')" in steps[0].sql_template
    assert "CASE" in steps[3].sql_template
    assert "stock_quantity - 9" in steps[3].sql_template
    assert "stock_quantity - 4" in steps[3].sql_template


def test_return_plan_has_bindings_for_every_placeholder(rule_planner):
    steps = _plan(rule_planner, F1_RETURN)
    assert len(steps) == 5
    for step in steps:
        bound = {b.name for b in step.bindings}
        assert set(step.placeholders()) == bound
    modes = {b.mode for b in steps[2].bindings}
    assert modes == {"per_row"}


def test_price_change_plan_single_update(rule_planner):
    steps = _plan(rule_planner, PRICE_CHANGE_TEXT)
    assert len(steps) == 1
    assert steps[0].description == "Update the selling price of pear"
    assert "selling_price = 1.6" in steps[0].sql_template


def test_revenue_question_is_single_sum_step(rule_planner):
    steps = _plan(rule_planner, "What was the total revenue for January 2023?")
    assert len(steps) == 1
    sql = steps[0].sql_template
    assert "SUM(total_price)" in sql
    assert "sale_date >= '2023-01-01'" in sql and "sale_date < '2023-02-01'" in sql


def test_average_weight_question_uses_placeholder_division(rule_planner):
    steps = _plan(
        rule_planner, "What was the average weight of fruit per sales transaction in January 2023?"
    )
    assert len(steps) == 3
    assert steps[2].placeholders() == ["total_weight", "num_sales"]
    assert "1.0 * <total_weight> / <num_sales>" in steps[2].sql_template


def test_joke_is_direct_reply(rule_planner):
    output = rule_planner.plan(UserInput(text="tell me a joke", turn_id=1), SCHEMA_DESC)
    assert isinstance(output, DirectReply)


def test_out_of_grammar_domain_input_is_unsupported(rule_planner):
    with pytest.raises(UnsupportedInput):
        rule_planner.plan(
            UserInput(text="Please recalculate all sales with a 10% discount", turn_id=1),
            SCHEMA_DESC,
        )


def test_planner_is_deterministic(rule_planner):
    once = _plan(rule_planner, F1_SALE)
    twice = _plan(rule_planner, F1_SALE)
    assert once == twice
    assert render_plan_text(once) == render_plan_text(twice)


def test_rule_plans_parse_in_the_grammar(rule_planner):
    for text in (F1_CHERRY_PURCHASE, F1_SALE, F1_RETURN, PRICE_CHANGE_TEXT):
        steps = _plan(rule_planner, text)
        rendered = render_plan_text(steps)
        reparsed = parse_plan_text(rendered)
        assert [s.description for s in reparsed] == [s.description for s in steps]
        assert [s.sql_template for s in reparsed] == [s.sql_template for s in steps]


def test_summary_embeds_final_value(f1_handle, rule_planner):
    trace = ingest(f1_handle, rule_planner, "What was the total revenue for January 2023?")
    assert trace.error is None
    # 9*3.8 + 4*1.3 = 39.4 booked on the only sale
    assert "39.4" in trace.reply
    assert "answer: 39.4" in trace.reply


def test_summary_for_aborted_trace_names_the_step(fresh_handle, rule_planner):
    # Returning for a customer with no matching sale: step 2's scalar source
    # is empty, so the turn aborts at step 2 and the reply says so.
    trace = ingest(fresh_handle, rule_planner, F1_RETURN)
    assert trace.error is not None
    assert trace.error.step_index == 2
    assert "step 2" in trace.reply


def test_record_turn_reply_confirms_the_record(f1_handle, rule_planner):
    trace = ingest(f1_handle, rule_planner, PRICE_CHANGE_TEXT)
    assert trace.reply == "Updated the selling price of pear to 1.6."
