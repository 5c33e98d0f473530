from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqlmem.engine import (
    ExecutedStep,
    ExecutionTrace,
    MemoryStep,
    PlaceholderBinding,
    UserInput,
    resolve_step,
    run_turn,
)
from sqlmem.errors import AmbiguousScalar, EmptySource, UnresolvedPlaceholder
from sqlmem.memory import ResultTable

from conftest import F1_RECORDS, F1_RETURN, PRICE_CHANGE_TEXT, ingest


def _trace_with_result(columns, rows, description="Find rows"):
    """A one-step trace whose step produced the given read result."""
    step = MemoryStep(index=1, description=description, sql_template="SELECT 1")
    executed = ExecutedStep(step=step)
    executed.resolved_statements = []
    executed.results = [ResultTable(columns=tuple(columns), rows=tuple(rows))]
    return ExecutionTrace(input=UserInput(text="x", turn_id=1), steps=[executed])


def test_scalar_substitution_fig_return_delete():
    trace = _trace_with_result([("sale_id", "integer")], [(9,)])
    step = MemoryStep(
        index=2,
        description="Delete the sale record",
        sql_template="DELETE FROM sales WHERE sale_id = <sale_id>",
        bindings=(PlaceholderBinding("sale_id", source_step=1, column="sale_id"),),
    )
    statements = resolve_step(step, trace)
    assert [s.text for s in statements] == ["DELETE FROM sales WHERE sale_id = 9"]


def test_per_row_fan_out_two_updates():
    trace = _trace_with_result(
        [("fruit_id", "integer"), ("quantity_sold", "integer")], [(7, 10), (6, 9)]
    )
    step = MemoryStep(
        index=2,
        description="Increase stock for each fruit sold",
        sql_template=(
            "UPDATE fruits SET stock_quantity = stock_quantity + <quantity_sold> "
            "WHERE fruit_id = <fruit_id>;"
        ),
        bindings=(
            PlaceholderBinding("quantity_sold", 1, "quantity_sold", mode="per_row"),
            PlaceholderBinding("fruit_id", 1, "fruit_id", mode="per_row"),
        ),
    )
    statements = [s.text for s in resolve_step(step, trace)]
    assert statements == [
        "UPDATE fruits SET stock_quantity = stock_quantity + 10 WHERE fruit_id = 7",
        "UPDATE fruits SET stock_quantity = stock_quantity + 9 WHERE fruit_id = 6",
    ]


def test_no_placeholders_returns_template_verbatim():
    trace = ExecutionTrace(input=UserInput(text="x", turn_id=1))
    step = MemoryStep(index=1, description="d", sql_template="SELECT COUNT(*) AS n FROM sales")
    statements = resolve_step(step, trace)
    assert [s.text for s in statements] == ["SELECT COUNT(*) AS n FROM sales"]


def test_unbound_placeholder_raises():
    trace = ExecutionTrace(input=UserInput(text="x", turn_id=1))
    step = MemoryStep(index=1, description="d", sql_template="SELECT <missing>")
    with pytest.raises(UnresolvedPlaceholder):
        resolve_step(step, trace)


def test_scalar_with_zero_rows_raises_empty_source():
    trace = _trace_with_result([("sale_id", "integer")], [])
    step = MemoryStep(
        index=2,
        description="d",
        sql_template="DELETE FROM sales WHERE sale_id = <sale_id>",
        bindings=(PlaceholderBinding("sale_id", 1, "sale_id"),),
    )
    with pytest.raises(EmptySource):
        resolve_step(step, trace)


def test_scalar_with_two_rows_raises_ambiguous():
    trace = _trace_with_result([("sale_id", "integer")], [(9,), (10,)])
    step = MemoryStep(
        index=2,
        description="d",
        sql_template="DELETE FROM sales WHERE sale_id = <sale_id>",
        bindings=(PlaceholderBinding("sale_id", 1, "sale_id"),),
    )
    with pytest.raises(AmbiguousScalar):
        resolve_step(step, trace)


def test_placeholder_inside_string_is_not_substituted():
    trace = _trace_with_result([("v", "integer")], [(1,)])
    step = MemoryStep(
        index=2,
        description="d",
        sql_template="SELECT '<v>' AS literal, <v> AS value",
        bindings=(PlaceholderBinding("v", 1, "v"),),
    )
    statements = resolve_step(step, trace)
    assert statements[0].text == "SELECT '<v>' AS literal, 1 AS value"


@settings(max_examples=40, deadline=None)
@given(
    n_rows=st.integers(min_value=1, max_value=6),
    n_templates=st.integers(min_value=1, max_value=4),
)
def test_fan_out_cardinality_is_rows_times_templates(n_rows, n_templates):
    rows = [(i, i * 2) for i in range(1, n_rows + 1)]
    trace = _trace_with_result([("a", "integer"), ("b", "integer")], rows)
    template = ";\n".join(
        f"UPDATE t{k} SET x = <a> WHERE y = <b>" for k in range(n_templates)
    )
    step = MemoryStep(
        index=2,
        description="fan out",
        sql_template=template,
        bindings=(
            PlaceholderBinding("a", 1, "a", mode="per_row"),
            PlaceholderBinding("b", 1, "b", mode="per_row"),
        ),
    )
    statements = resolve_step(step, trace)
    assert len(statements) == n_rows * n_templates


# -- run_turn ---------------------------------------------------------------


def test_direct_reply_turn_has_zero_steps(fresh_handle, rule_planner):
    trace = run_turn(UserInput(text="hello, who are you?", turn_id=1), rule_planner, fresh_handle)
    assert trace.steps == []
    assert trace.error is None
    assert not trace.used_memory
    assert trace.reply


def test_price_change_turn_is_single_update(fresh_handle, rule_planner):
    ingest(fresh_handle, rule_planner,
           "We restocked our store on 2023-01-01 with a new supply of fruits from "
           "'ABC' (abc_sup@example.com, 10080). The purchased quantities include "
           "10 kg pear, at unit prices of 1. Our intended selling price of pear is "
           "1.2 dollars per unit.")
    trace = ingest(fresh_handle, rule_planner, PRICE_CHANGE_TEXT)
    assert trace.error is None
    assert len(trace.steps) == 1
    executed = trace.steps[0]
    assert len(executed.resolved_statements) == 1
    assert executed.resolved_statements[0].text.startswith("UPDATE fruits")
    assert executed.results[0].rows_affected == 1


def test_return_turn_fans_out_to_two_updates(f1_handle, rule_planner):
    trace = ingest(f1_handle, rule_planner, F1_RETURN)
    assert trace.error is None
    assert len(trace.steps) == 5
    step3 = trace.steps[2]
    assert len(step3.resolved_statements) == 2
    assert all(s.text.startswith("UPDATE fruits") for s in step3.resolved_statements)


def test_step_failure_aborts_turn_and_keeps_partial_trace(fresh_handle):
    class BrokenPlanner:
        from sqlmem.planner.base import PlannerConfig

        config = PlannerConfig(mode="rule")

        def plan(self, input, schema_desc):
            from sqlmem.planner.base import Plan

            return Plan(
                steps=(
                    MemoryStep(index=1, description="ok", sql_template="SELECT 1 AS one"),
                    MemoryStep(index=2, description="boom", sql_template="SELECT nope FROM missing"),
                    MemoryStep(index=3, description="never", sql_template="SELECT 2 AS two"),
                )
            )

        def update_operation(self, step, prior):
            raise AssertionError("not used")

        def summarize(self, input, trace):
            assert trace.error is not None
            return f"failed at step {trace.error.step_index}"

    trace = run_turn(UserInput(text="x", turn_id=1), BrokenPlanner(), fresh_handle)
    assert trace.error is not None
    assert trace.error.step_index == 2
    assert len(trace.steps) == 2  # step 3 never ran
    assert trace.steps[1].results == []
    assert "step 2" in trace.reply


def test_empty_write_fanout_degrades_to_note(fresh_handle):
    class FanoutPlanner:
        from sqlmem.planner.base import PlannerConfig

        config = PlannerConfig(mode="rule")

        def plan(self, input, schema_desc):
            from sqlmem.planner.base import Plan

            return Plan(
                steps=(
                    MemoryStep(index=1, description="find", sql_template="SELECT sale_id FROM sales"),
                    MemoryStep(
                        index=2,
                        description="delete per row",
                        sql_template="DELETE FROM sale_items WHERE sale_id = <sale_id>",
                        bindings=(PlaceholderBinding("sale_id", 1, "sale_id", mode="per_row"),),
                    ),
                    MemoryStep(index=3, description="count", sql_template="SELECT COUNT(*) AS n FROM sales"),
                )
            )

        def update_operation(self, step, prior):
            raise AssertionError("not used")

        def summarize(self, input, trace):
            return "done"

    trace = run_turn(UserInput(text="x", turn_id=1), FanoutPlanner(), fresh_handle)
    assert trace.error is None
    assert len(trace.steps) == 3
    assert trace.steps[1].resolved_statements == []
    assert "no rows to act on" in trace.steps[1].note
    assert trace.steps[2].results[0].rows == ((0,),)


def test_trace_completeness_and_order(f1_handle, rule_planner):
    sent: list[str] = []
    original = f1_handle.execute

    def spy(stmt):
        sent.append(stmt.text if hasattr(stmt, "text") else stmt)
        return original(stmt)

    f1_handle.execute = spy
    try:
        trace = ingest(f1_handle, rule_planner, F1_RETURN)
    finally:
        f1_handle.execute = original
    in_trace = [s.text for ex in trace.steps for s in ex.resolved_statements]
    assert sent == in_trace
    indices = [ex.step.index for ex in trace.steps]
    assert indices == sorted(set(indices))  # halting: no step twice


def test_replay_reproduces_identical_trace(fresh_handle, rule_planner):
    for text in F1_RECORDS[:2]:
        ingest(fresh_handle, rule_planner, text)
    snap = fresh_handle.snapshot()
    first = ingest(fresh_handle, rule_planner, F1_RECORDS[2], turn=7)
    dump_after = fresh_handle.dump()
    fresh_handle.rollback(snap)
    second = ingest(fresh_handle, rule_planner, F1_RECORDS[2], turn=7)
    assert first.to_dict() == second.to_dict()
    assert fresh_handle.dump() == dump_after


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        UserInput(text="   ", turn_id=1)


def test_trace_document_shape(f1_handle, rule_planner):
    trace = ingest(f1_handle, rule_planner, "What was the total revenue for January 2023?")
    doc = trace.to_dict()
    assert set(doc) == {"turn_id", "input", "used_memory", "steps", "error", "reply"}
    assert doc["used_memory"] is True
    step = doc["steps"][0]
    assert set(step) == {"index", "description", "statements", "results", "note"}
    assert len(step["statements"]) == len(step["results"])
