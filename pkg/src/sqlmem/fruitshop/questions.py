"""Question taxonomy, fixed phrasings, and oracle-computed answers.

Five easy templates (single lookups) and ten hard ones (aggregates,
superlatives, multi-step averages). Answers come exclusively from the
brute-force simulator in ``state.py``; nothing here touches SQL.

Superlative templates (highest-revenue day, top customer, best-selling
fruit, top supplier) break ties deterministically: higher value first,
then earliest date or lexicographically smallest name. The rule planner's
SQL uses the same ordering, so both routes always name the same winner.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Union

from ..errors import UndefinedAnswer
from .state import ShopState

EASY_KINDS = ("stock", "price", "customers", "suppliers", "kg_purchased")
HARD_KINDS = (
    "revenue_range",
    "best_day",
    "avg_weight",
    "fruit_revenue",
    "top_customer",
    "valid_sales",
    "purchase_cost_range",
    "best_fruit",
    "top_supplier",
    "avg_sale_value",
)

_CENT = Decimal("0.01")


def quantize2(value: Decimal) -> Decimal:
    return value.quantize(_CENT, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class Numeric:
    value: float
    tolerance: float


@dataclass(frozen=True)
class Categorical:
    value: str


@dataclass(frozen=True)
class DateAnswer:
    value: str


AnswerSpec = Union[Numeric, Categorical, DateAnswer]


def answer_to_dict(spec: AnswerSpec) -> dict:
    if isinstance(spec, Numeric):
        return {"type": "numeric", "value": spec.value, "tolerance": spec.tolerance}
    if isinstance(spec, Categorical):
        return {"type": "categorical", "value": spec.value}
    if isinstance(spec, DateAnswer):
        return {"type": "date", "value": spec.value}
    raise TypeError(f"not an answer spec: {spec!r}")


def answer_from_dict(data: dict) -> AnswerSpec:
    kind = data.get("type")
    if kind == "numeric":
        return Numeric(float(data["value"]), float(data["tolerance"]))
    if kind == "categorical":
        return Categorical(str(data["value"]))
    if kind == "date":
        return DateAnswer(str(data["value"]))
    raise ValueError(f"unknown answer type {kind!r}")


@dataclass(frozen=True)
class QuestionSpec:
    """A parameterized question instance (template id plus slot values)."""

    kind: str
    fruit: str = ""
    start: str = ""  # inclusive
    end: str = ""  # inclusive
    month_form: bool = False  # phrased "for/in January 2023" rather than from/to

    @property
    def difficulty(self) -> str:
        return "easy" if self.kind in EASY_KINDS else "hard"


@dataclass(frozen=True)
class Question:
    """Evaluation item: text, difficulty, and the oracle-computed answer."""

    text: str
    difficulty: str
    answer: AnswerSpec
    template: str = ""


def month_bounds(month: str) -> tuple[str, str]:
    """Inclusive (first_day, last_day) of a "YYYY-MM" month."""
    year, mon = int(month[:4]), int(month[5:7])
    last = calendar.monthrange(year, mon)[1]
    return f"{year:04d}-{mon:02d}-01", f"{year:04d}-{mon:02d}-{last:02d}"


def month_phrase(month: str) -> str:
    year, mon = int(month[:4]), int(month[5:7])
    return f"{calendar.month_name[mon]} {year}"


def _phrase_to_month(phrase: str) -> str | None:
    """"January 2023" -> "2023-01", or None when the phrase is not a month."""
    name, _, year = phrase.partition(" ")
    months = {m: i for i, m in enumerate(calendar.month_name) if m}
    if name not in months or not (len(year) == 4 and year.isdigit()):
        return None
    return f"{int(year):04d}-{months[name]:02d}"


def render_question(spec: QuestionSpec, month: str) -> str:
    phrase = month_phrase(month)
    k = spec.kind
    if k == "stock":
        return f"What is the current stock quantity of {spec.fruit} in kg?"
    if k == "price":
        return f"What is the current selling price of {spec.fruit}?"
    if k == "customers":
        return "How many distinct customers have made purchases at the shop?"
    if k == "suppliers":
        return "How many suppliers does the shop have?"
    if k == "kg_purchased":
        return f"What is the total weight in kg of {spec.fruit} purchased from suppliers?"
    if k == "revenue_range":
        if spec.month_form:
            return f"What was the total revenue for {phrase}?"
        return f"What was the total revenue from {spec.start} to {spec.end}?"
    if k == "best_day":
        return f"Which day in {phrase} had the highest revenue?"
    if k == "avg_weight":
        return f"What was the average weight of fruit per sales transaction in {phrase}?"
    if k == "fruit_revenue":
        return f"What was the total revenue from sales of {spec.fruit}?"
    if k == "top_customer":
        return "Which customer spent the most in total?"
    if k == "valid_sales":
        return f"How many valid sales transactions were made in {phrase}?"
    if k == "purchase_cost_range":
        return f"What was the total cost of purchases from {spec.start} to {spec.end}?"
    if k == "best_fruit":
        return "Which fruit was the best-selling by weight?"
    if k == "top_supplier":
        return "Which supplier provided the most fruit by weight?"
    if k == "avg_sale_value":
        return f"What was the average value of a sales transaction in {phrase}?"
    raise ValueError(f"unknown question kind {k!r}")


_Q_PATTERNS: list[tuple[str, re.Pattern]] = [
    ("stock", re.compile(r"^What is the current stock quantity of ([a-z]+) in kg\?$")),
    ("price", re.compile(r"^What is the current selling price of ([a-z]+)\?$")),
    ("customers", re.compile(r"^How many distinct customers have made purchases at the shop\?$")),
    ("suppliers", re.compile(r"^How many suppliers does the shop have\?$")),
    ("kg_purchased", re.compile(r"^What is the total weight in kg of ([a-z]+) purchased from suppliers\?$")),
    ("revenue_month", re.compile(r"^What was the total revenue for ([A-Z][a-z]+ \d{4})\?$")),
    ("revenue_range", re.compile(r"^What was the total revenue from (\d{4}-\d{2}-\d{2}) to (\d{4}-\d{2}-\d{2})\?$")),
    ("best_day", re.compile(r"^Which day in ([A-Z][a-z]+ \d{4}) had the highest revenue\?$")),
    ("avg_weight", re.compile(r"^What was the average weight of fruit per sales transaction in ([A-Z][a-z]+ \d{4})\?$")),
    ("fruit_revenue", re.compile(r"^What was the total revenue from sales of ([a-z]+)\?$")),
    ("top_customer", re.compile(r"^Which customer spent the most in total\?$")),
    ("valid_sales", re.compile(r"^How many valid sales transactions were made in ([A-Z][a-z]+ \d{4})\?$")),
    ("purchase_cost_range", re.compile(r"^What was the total cost of purchases from (\d{4}-\d{2}-\d{2}) to (\d{4}-\d{2}-\d{2})\?$")),
    ("best_fruit", re.compile(r"^Which fruit was the best-selling by weight\?$")),
    ("top_supplier", re.compile(r"^Which supplier provided the most fruit by weight\?$")),
    ("avg_sale_value", re.compile(r"^What was the average value of a sales transaction in ([A-Z][a-z]+ \d{4})\?$")),
]

_MONTH_SCOPED = {"best_day", "avg_weight", "valid_sales", "avg_sale_value"}


def parse_question_text(text: str) -> QuestionSpec | None:
    """Match a question against the fixed taxonomy; None when outside it."""
    text = text.strip()
    for kind, pattern in _Q_PATTERNS:
        m = pattern.match(text)
        if m is None:
            continue
        if kind in ("stock", "price", "kg_purchased", "fruit_revenue"):
            return QuestionSpec(kind=kind, fruit=m.group(1))
        if kind in ("customers", "suppliers", "top_customer", "best_fruit", "top_supplier"):
            return QuestionSpec(kind=kind)
        if kind == "revenue_month":
            month = _phrase_to_month(m.group(1))
            if month is None:
                return None
            start, end = month_bounds(month)
            return QuestionSpec(kind="revenue_range", start=start, end=end, month_form=True)
        if kind in ("revenue_range", "purchase_cost_range"):
            return QuestionSpec(kind=kind, start=m.group(1), end=m.group(2))
        if kind in _MONTH_SCOPED:
            month = _phrase_to_month(m.group(1))
            if month is None:
                return None
            start, end = month_bounds(month)
            return QuestionSpec(kind=kind, start=start, end=end, month_form=True)
    return None


def _live_in(state: ShopState, start: str, end: str):
    return [s for s in state.live_sales if start <= s.date <= end]


def oracle_answer(spec: QuestionSpec, state: ShopState) -> AnswerSpec:
    """Compute the answer by direct simulation arithmetic; never via SQL.

    Raises UndefinedAnswer when the history gives the template nothing to
    stand on (the generator then skips the candidate).
    """
    k = spec.kind

    if k == "stock":
        # An empty shop trivially stocks zero of anything, so this one is
        # always defined (the generator still only asks about known fruits).
        return Numeric(float(state.stock.get(spec.fruit, 0)), 0.0)

    if k == "price":
        price = state.price.get(spec.fruit)
        if price is None:
            raise UndefinedAnswer(f"no selling price for {spec.fruit}")
        return Numeric(float(price), 0.01)

    if k == "customers":
        return Numeric(float(len(state.customers)), 0.0)

    if k == "suppliers":
        return Numeric(float(len(state.suppliers)), 0.0)

    if k == "kg_purchased":
        lines = [l for p in state.purchases for l in p.lines if l.fruit == spec.fruit]
        if not lines:
            raise UndefinedAnswer(f"{spec.fruit} never purchased")
        return Numeric(float(sum(l.quantity for l in lines)), 0.0)

    if k == "revenue_range":
        sales = _live_in(state, spec.start, spec.end)
        if not sales:
            raise UndefinedAnswer("no live sales in range")
        total = quantize2(sum((s.total for s in sales), Decimal(0)))
        return Numeric(float(total), 0.01)

    if k == "best_day":
        sales = _live_in(state, spec.start, spec.end)
        if not sales:
            raise UndefinedAnswer("no live sales in range")
        by_day: dict[str, Decimal] = {}
        for s in sales:
            by_day[s.date] = by_day.get(s.date, Decimal(0)) + s.total
        best = min(by_day.items(), key=lambda kv: (-quantize2(kv[1]), kv[0]))
        return DateAnswer(best[0])

    if k == "avg_weight":
        sales = _live_in(state, spec.start, spec.end)
        if not sales:
            raise UndefinedAnswer("no live sales in range")
        kg = sum(l.quantity for s in sales for l in s.lines)
        return Numeric(float(quantize2(Decimal(kg) / len(sales))), 0.01)

    if k == "fruit_revenue":
        lines = [l for s in state.live_sales for l in s.lines if l.fruit == spec.fruit]
        if not lines:
            raise UndefinedAnswer(f"no live sales of {spec.fruit}")
        total = quantize2(sum((l.line_total for l in lines), Decimal(0)))
        return Numeric(float(total), 0.01)

    if k == "top_customer":
        if not state.live_sales:
            raise UndefinedAnswer("no live sales")
        totals: dict[str, Decimal] = {}
        for s in state.live_sales:
            totals[s.customer_name] = totals.get(s.customer_name, Decimal(0)) + s.total
        best = min(totals.items(), key=lambda kv: (-quantize2(kv[1]), kv[0]))
        return Categorical(best[0])

    if k == "valid_sales":
        return Numeric(float(len(_live_in(state, spec.start, spec.end))), 0.0)

    if k == "purchase_cost_range":
        entries = [p for p in state.purchases if spec.start <= p.date <= spec.end]
        if not entries:
            raise UndefinedAnswer("no purchases in range")
        total = quantize2(sum((p.total for p in entries), Decimal(0)))
        return Numeric(float(total), 0.01)

    if k == "best_fruit":
        kg: dict[str, int] = {}
        for s in state.live_sales:
            for l in s.lines:
                kg[l.fruit] = kg.get(l.fruit, 0) + l.quantity
        if not kg:
            raise UndefinedAnswer("no live sales")
        best = min(kg.items(), key=lambda kv: (-kv[1], kv[0]))
        return Categorical(best[0])

    if k == "top_supplier":
        kg_by: dict[str, int] = {}
        for p in state.purchases:
            kg_by[p.supplier] = kg_by.get(p.supplier, 0) + sum(l.quantity for l in p.lines)
        if not kg_by:
            raise UndefinedAnswer("no purchases")
        best = min(kg_by.items(), key=lambda kv: (-kv[1], kv[0]))
        return Categorical(best[0])

    if k == "avg_sale_value":
        sales = _live_in(state, spec.start, spec.end)
        if not sales:
            raise UndefinedAnswer("no live sales in range")
        total = sum((s.total for s in sales), Decimal(0))
        return Numeric(float(quantize2(total / len(sales))), 0.01)

    raise ValueError(f"unknown question kind {k!r}")


def make_question(spec: QuestionSpec, state: ShopState, month: str) -> Question:
    return Question(
        text=render_question(spec, month),
        difficulty=spec.difficulty,
        answer=oracle_answer(spec, state),
        template=spec.kind,
    )
