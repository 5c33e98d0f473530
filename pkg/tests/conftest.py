"""Shared fixtures: the F1 record set and common planner/handle factories.

F1 is a tiny hand-checkable history: two restocking purchases (apple at
selling price 3.8, cherry at 1.3), a two-item sale (9 kg apple + 4 kg
cherry, so the booked total must be 9*3.8 + 4*1.3 = 39.4), and a return
that undoes that sale.
"""

from __future__ import annotations

import pytest

from sqlmem.engine import UserInput, run_turn
from sqlmem.memory import init_schema
from sqlmem.planner.base import PlannerConfig
from sqlmem.planner.rule import RulePlanner
from sqlmem.schema import fruit_shop_schema

F1_APPLE_PURCHASE = (
    "We restocked our store on 2023-01-01 with a new supply of fruits from "
    "'FreshFarm' (freshfarm_sup@example.com, 10081). The purchased quantities "
    "include 15 kg apple, at unit prices of 2. Our intended selling price of "
    "apple is 3.8 dollars per unit."
)
F1_CHERRY_PURCHASE = (
    "We restocked our store on 2023-01-01 with a new supply of fruits from "
    "'ABC' (abc_sup@example.com, 10080). The purchased quantities include "
    "24 kg cherry, at unit prices of 0.8. Our intended selling price of "
    "cherry is 1.3 dollars per unit."
)
F1_SALE = (
    "A sale was made on 2023-01-02 to 'Bob Smith' (contact details: "
    "123-456-7893, bob.smith@example.com). The items purchased were "
    "9 kg apple, 4 kg cherry."
)
F1_RETURN = (
    "On 2023-01-06, because the customer returned their purchase, we are "
    "required to undo the sales transaction made by customer 'Bob Smith' "
    "(phone: 123-456-7893, email: bob.smith@example.com) on 2023-01-02."
)

F1_RECORDS = [F1_APPLE_PURCHASE, F1_CHERRY_PURCHASE, F1_SALE]

PRICE_CHANGE_TEXT = (
    "On 2023-01-05, the sale price of pear in the store was changed to "
    "1.6 dollar per unit."
)


ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{name}: {status}")


@pytest.fixture
def rule_planner() -> RulePlanner:
    return RulePlanner(PlannerConfig(mode="rule"))


@pytest.fixture
def fresh_handle():
    handle = init_schema(fruit_shop_schema())
    yield handle
    handle.close()


@pytest.fixture
def f1_handle(rule_planner):
    """Handle with the three F1 records ingested (sale not yet returned)."""
    handle = init_schema(fruit_shop_schema())
    for turn, text in enumerate(F1_RECORDS, start=1):
        trace = run_turn(UserInput(text=text, turn_id=turn), rule_planner, handle)
        assert trace.error is None, trace.error
    yield handle
    handle.close()


def ingest(handle, planner, text: str, turn: int = 99):
    trace = run_turn(UserInput(text=text, turn_id=turn), planner, handle)
    return trace
