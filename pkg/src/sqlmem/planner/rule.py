"""Deterministic rule-based planner over the fruit-shop grammar.

Plans are built mechanically from parsed records and questions, mirroring
the four record flows and the question taxonomy step for step. Every SQL
template the planner emits stays inside the pinned subset, placeholders
always come with structured bindings, and identical input text yields
byte-identical output.

The planner doubles as the oracle-side fixture for the evaluation harness:
its replies carry a machine-readable ``answer:`` line holding the value the
final query returned, rendered exactly as the result table shows it.
"""

from __future__ import annotations

from ..engine import ExecutionTrace, MemoryStep, PlaceholderBinding, UserInput
from ..errors import UnsupportedInput
from ..fruitshop.questions import QuestionSpec, parse_question_text
from ..fruitshop.records import (
    PriceChange,
    Purchase,
    Return,
    Sale,
    ShopRecord,
    money,
    parse_record_text,
)
from ..memory import SqlStatement
from ..render import format_cell
from .base import DirectReply, Plan, PlannerConfig, PlannerOutput

_GREETING_WORDS = ("hello", "hi ", "hi!", "hi,", "hey", "joke", "who are you", "thank", "how are you")
_DOMAIN_WORDS = (
    "fruit", "stock", "price", "sale", "sales", "sold", "revenue", "supplier",
    "purchase", "customer", "return", "kg", "restock", "shop",
)

_DIRECT_REPLY = (
    "I keep this shop's books in a relational memory. Give me a record "
    "(a purchase, a sale, a return, a price change) or ask a question "
    "about the shop's history."
)


def _names(fruits: list[str]) -> str:
    if len(fruits) == 1:
        return fruits[0]
    return ", ".join(fruits[:-1]) + " and " + fruits[-1]


def _q(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


class RulePlanner:
    """Rule planner; immutable and shareable after construction."""

    def __init__(self, config: PlannerConfig | None = None):
        self.config = config or PlannerConfig(mode="rule")
        self.config.validate()

    # -- planning -------------------------------------------------------------

    def plan(self, input: UserInput, schema_desc: str) -> PlannerOutput:
        text = input.text.strip()
        record = parse_record_text(text)
        if record is not None:
            return Plan(steps=tuple(plan_record(record)))
        question = parse_question_text(text)
        if question is not None:
            return Plan(steps=tuple(plan_question(question)))
        lowered = text.lower()
        if any(w in lowered for w in _GREETING_WORDS) and not any(
            w in lowered for w in _DOMAIN_WORDS
        ):
            return DirectReply(_DIRECT_REPLY)
        raise UnsupportedInput(f"input outside the rule grammar: {text[:80]!r}")

    def update_operation(self, step: MemoryStep, prior: ExecutionTrace) -> list[SqlStatement]:
        # Structured bindings make this a pass-through to the mechanical path.
        from ..engine import resolve_step

        return resolve_step(step, prior)

    # -- summaries ------------------------------------------------------------

    def summarize(self, input: UserInput, trace: ExecutionTrace) -> str:
        if trace.error is not None:
            step = trace.error.step_index
            where = f"step {step}" if step else "planning"
            if trace.error.message.startswith("empty source"):
                return (
                    f"Nothing to act on: {where} found no matching rows. "
                    f"answer: none"
                )
            return f"I could not complete this request; {where} failed: {trace.error.message}"

        record = parse_record_text(input.text.strip())
        if record is not None:
            return _record_summary(record)

        question = parse_question_text(input.text.strip())
        if question is not None:
            value = _question_answer_text(question, trace)
            return f"Based on the shop records, the result is {value}. answer: {value}"

        return _DIRECT_REPLY


def _record_summary(record: ShopRecord) -> str:
    if isinstance(record, Purchase):
        return f"Recorded the purchase from '{record.supplier.name}' on {record.date}."
    if isinstance(record, Sale):
        return f"Recorded the sale to '{record.customer.full_name}' on {record.date}."
    if isinstance(record, Return):
        return (
            f"Recorded the return: the sale made by '{record.customer.full_name}' "
            f"on {record.sale_date} has been undone."
        )
    return f"Updated the selling price of {record.fruit} to {money(record.new_price)}."


def _question_answer_text(question: QuestionSpec, trace: ExecutionTrace) -> str:
    """Extract the graded value from the final read result, verbatim."""
    result = None
    for executed in reversed(trace.steps):
        result = executed.read_result()
        if result is not None:
            break
    if result is None or not result.rows:
        return "none"
    row = result.rows[0]
    if question.kind == "top_customer":
        return f"{row[0]} {row[1]}"
    return format_cell(row[0])


# -- record plans --------------------------------------------------------------


def plan_record(record: ShopRecord) -> list[MemoryStep]:
    if isinstance(record, Purchase):
        return _purchase_plan(record)
    if isinstance(record, Sale):
        return _sale_plan(record)
    if isinstance(record, Return):
        return _return_plan(record)
    if isinstance(record, PriceChange):
        return _price_change_plan(record)
    raise TypeError(f"not a shop record: {record!r}")


def _insert_fruit_if_missing(fruit: str) -> str:
    return (
        "INSERT INTO fruits (fruit_name, selling_price, stock_quantity, fruit_type, shelf_life)\n"
        f"SELECT {_q(fruit)}, NULL, 0, NULL, NULL\n"
        f"WHERE NOT EXISTS (SELECT 1 FROM fruits WHERE fruit_name = {_q(fruit)});"
    )


def _stock_update(changes: list[tuple[str, int]], sign: str) -> str:
    if len(changes) == 1:
        fruit, qty = changes[0]
        return (
            "UPDATE fruits\n"
            f"SET stock_quantity = stock_quantity {sign} {qty}\n"
            f"WHERE fruit_name = {_q(fruit)};"
        )
    cases = "\n".join(
        f"    WHEN fruit_name = {_q(fruit)} THEN stock_quantity {sign} {qty}"
        for fruit, qty in changes
    )
    names = ", ".join(_q(fruit) for fruit, _qty in changes)
    return (
        "UPDATE fruits\n"
        "SET stock_quantity = CASE\n"
        f"{cases}\n"
        "    ELSE stock_quantity\n"
        "END\n"
        f"WHERE fruit_name IN ({names});"
    )


def _purchase_plan(p: Purchase) -> list[MemoryStep]:
    steps: list[MemoryStep] = []
    s = p.supplier
    steps.append(
        MemoryStep(
            index=1,
            description=f"Insert supplier '{s.name}' if not exists",
            sql_template=(
                "INSERT INTO suppliers (supplier_name, contact_number, email)\n"
                f"SELECT {_q(s.name)}, {_q(s.phone)}, {_q(s.email)}\n"
                f"WHERE NOT EXISTS (SELECT 1 FROM suppliers WHERE supplier_name = {_q(s.name)});"
            ),
        )
    )
    fruit_word = "fruit" if len(p.items) == 1 else "fruits"
    steps.append(
        MemoryStep(
            index=2,
            description=(
                f"Insert {fruit_word} (set the selling price to NULL and stock quantity to 0) "
                "if not exists"
            ),
            sql_template="\n".join(_insert_fruit_if_missing(i.fruit) for i in p.items),
        )
    )
    cost_expr = " + ".join(f"{i.quantity} * {money(i.unit_cost)}" for i in p.items)
    steps.append(
        MemoryStep(
            index=3,
            description="Insert purchase",
            sql_template=(
                "INSERT INTO purchases (supplier_id, purchase_date, total_cost)\n"
                f"VALUES ((SELECT supplier_id FROM suppliers WHERE supplier_name = {_q(s.name)}), "
                f"{_q(p.date)}, {cost_expr});"
            ),
        )
    )
    item_word = "item" if len(p.items) == 1 else "items"
    values = ",\n".join(
        "((SELECT MAX(purchase_id) FROM purchases), "
        f"(SELECT fruit_id FROM fruits WHERE fruit_name = {_q(i.fruit)}), "
        f"{i.quantity}, {money(i.unit_cost)}, {i.quantity} * {money(i.unit_cost)})"
        for i in p.items
    )
    steps.append(
        MemoryStep(
            index=4,
            description=f"Insert purchase {item_word}",
            sql_template=(
                "INSERT INTO purchase_items (purchase_id, fruit_id, quantity_purchased, "
                "cost_per_item, item_total_cost)\n"
                f"VALUES {values};"
            ),
        )
    )
    steps.append(
        MemoryStep(
            index=5,
            description=f"Update the stock quantity of {_names([i.fruit for i in p.items])}",
            sql_template=_stock_update([(i.fruit, i.quantity) for i in p.items], "+"),
        )
    )
    if p.new_prices:
        updates = "\n".join(
            f"UPDATE fruits\nSET selling_price = {money(price)}\nWHERE fruit_name = {_q(fruit)};"
            for fruit, price in p.new_prices
        )
        steps.append(
            MemoryStep(
                index=6,
                description=(
                    f"Update the selling price of {_names([f for f, _p in p.new_prices])} "
                    "if given new selling price"
                ),
                sql_template=updates,
            )
        )
    return steps


def _sale_plan(sale: Sale) -> list[MemoryStep]:
    c = sale.customer
    steps = [
        MemoryStep(
            index=1,
            description=f"Insert customer '{c.full_name}' if not exists",
            sql_template=(
                "INSERT INTO customers (first_name, last_name, phone_number, email)\n"
                f"SELECT {_q(c.first_name)}, {_q(c.last_name)}, {_q(c.phone)}, {_q(c.email)}\n"
                f"WHERE NOT EXISTS (SELECT 1 FROM customers WHERE phone_number = {_q(c.phone)});"
            ),
        )
    ]
    price_of = lambda f: f"(SELECT selling_price FROM fruits WHERE fruit_name = {_q(f)})"
    total_expr = " + ".join(f"{price_of(i.fruit)} * {i.quantity}" for i in sale.items)
    steps.append(
        MemoryStep(
            index=2,
            description="Insert sale",
            sql_template=(
                "INSERT INTO sales (customer_id, sale_date, total_price)\n"
                f"VALUES ((SELECT customer_id FROM customers WHERE phone_number = {_q(c.phone)}), "
                f"{_q(sale.date)}, {total_expr});"
            ),
        )
    )
    item_word = "item" if len(sale.items) == 1 else "items"
    values = ",\n".join(
        "((SELECT MAX(sale_id) FROM sales), "
        f"(SELECT fruit_id FROM fruits WHERE fruit_name = {_q(i.fruit)}), "
        f"{i.quantity}, {price_of(i.fruit)}, {price_of(i.fruit)} * {i.quantity})"
        for i in sale.items
    )
    steps.append(
        MemoryStep(
            index=3,
            description=f"Insert sale {item_word}",
            sql_template=(
                "INSERT INTO sale_items (sale_id, fruit_id, quantity_sold, price_per_item, "
                "item_total_price)\n"
                f"VALUES {values};"
            ),
        )
    )
    steps.append(
        MemoryStep(
            index=4,
            description=f"Update the stock quantity of {_names([i.fruit for i in sale.items])}",
            sql_template=_stock_update([(i.fruit, i.quantity) for i in sale.items], "-"),
        )
    )
    return steps


def _return_plan(r: Return) -> list[MemoryStep]:
    c = r.customer
    replace_note = "replace <sale_id> with the results from the previous queries"
    return [
        MemoryStep(
            index=1,
            description="Find the sale_id for this customer on this date",
            sql_template=(
                "SELECT sale_id FROM sales\n"
                "WHERE customer_id = (SELECT customer_id FROM customers "
                f"WHERE phone_number = {_q(c.phone)} AND email = {_q(c.email)}) "
                f"AND sale_date = {_q(r.sale_date)};"
            ),
        ),
        MemoryStep(
            index=2,
            description=f"Get all the fruit_id and quantity_sold for this sale, {replace_note}",
            sql_template=(
                "SELECT fruit_id, quantity_sold FROM sale_items\nWHERE sale_id = <sale_id>;"
            ),
            bindings=(PlaceholderBinding("sale_id", source_step=1, column="sale_id"),),
        ),
        MemoryStep(
            index=3,
            description=(
                "Increase the stock_quantity for each fruit sold in this sale, "
                "replace <quantity_sold> <fruit_id> with the results from the previous queries"
            ),
            sql_template=(
                "UPDATE fruits\n"
                "SET stock_quantity = stock_quantity + <quantity_sold>\n"
                "WHERE fruit_id = <fruit_id>;"
            ),
            bindings=(
                PlaceholderBinding("quantity_sold", source_step=2, column="quantity_sold", mode="per_row"),
                PlaceholderBinding("fruit_id", source_step=2, column="fruit_id", mode="per_row"),
            ),
        ),
        MemoryStep(
            index=4,
            description=f"Delete the sale items for this sale, {replace_note}",
            sql_template="DELETE FROM sale_items WHERE sale_id = <sale_id>;",
            bindings=(PlaceholderBinding("sale_id", source_step=1, column="sale_id"),),
        ),
        MemoryStep(
            index=5,
            description=f"Delete the sale record, {replace_note}",
            sql_template="DELETE FROM sales WHERE sale_id = <sale_id>;",
            bindings=(PlaceholderBinding("sale_id", source_step=1, column="sale_id"),),
        ),
    ]


def _price_change_plan(pc: PriceChange) -> list[MemoryStep]:
    return [
        MemoryStep(
            index=1,
            description=f"Update the selling price of {pc.fruit}",
            sql_template=(
                "UPDATE fruits\n"
                f"SET selling_price = {money(pc.new_price)}\n"
                f"WHERE fruit_name = {_q(pc.fruit)};"
            ),
        )
    ]


# -- question plans --------------------------------------------------------------


def plan_question(q: QuestionSpec) -> list[MemoryStep]:
    phrase = _range_phrase(q)
    k = q.kind

    if k == "stock":
        return _one_step(
            f"Look up the current stock quantity of {q.fruit}",
            f"SELECT stock_quantity FROM fruits WHERE fruit_name = {_q(q.fruit)};",
        )
    if k == "price":
        return _one_step(
            f"Look up the current selling price of {q.fruit}",
            f"SELECT selling_price FROM fruits WHERE fruit_name = {_q(q.fruit)};",
        )
    if k == "customers":
        return _one_step(
            "Count the distinct customers on record",
            "SELECT COUNT(*) AS num_customers FROM customers;",
        )
    if k == "suppliers":
        return _one_step(
            "Count the suppliers on record",
            "SELECT COUNT(*) AS num_suppliers FROM suppliers;",
        )
    if k == "kg_purchased":
        return _one_step(
            f"Calculate the total weight of {q.fruit} purchased",
            "SELECT SUM(pi.quantity_purchased) AS total_kg\n"
            "FROM purchase_items pi\n"
            "JOIN fruits f ON pi.fruit_id = f.fruit_id\n"
            f"WHERE f.fruit_name = {_q(q.fruit)};",
        )
    if k == "revenue_range":
        return _one_step(
            f"Calculate the total revenue {phrase}",
            "SELECT ROUND(SUM(total_price), 2) AS total_revenue\n"
            f"FROM sales\n{_date_filter('sale_date', q)};",
        )
    if k == "best_day":
        return [
            MemoryStep(
                index=1,
                description=f"Calculate the total revenue for each day {phrase}",
                sql_template=(
                    "SELECT sale_date, ROUND(SUM(total_price), 2) AS revenue\n"
                    f"FROM sales\n{_date_filter('sale_date', q)}\n"
                    "GROUP BY sale_date;"
                ),
            ),
            MemoryStep(
                index=2,
                description="Find the day with the highest revenue",
                sql_template=(
                    "SELECT sale_date, ROUND(SUM(total_price), 2) AS revenue\n"
                    f"FROM sales\n{_date_filter('sale_date', q)}\n"
                    "GROUP BY sale_date\n"
                    "ORDER BY revenue DESC, sale_date ASC LIMIT 1;"
                ),
            ),
        ]
    if k == "avg_weight":
        return [
            MemoryStep(
                index=1,
                description=f"Calculate the total weight of fruit sold {phrase}",
                sql_template=(
                    "SELECT SUM(si.quantity_sold) AS total_weight\n"
                    "FROM sale_items si\n"
                    "JOIN sales s ON si.sale_id = s.sale_id\n"
                    f"{_date_filter('s.sale_date', q)};"
                ),
            ),
            MemoryStep(
                index=2,
                description=f"Count the number of sales transactions {phrase}",
                sql_template=(
                    "SELECT COUNT(DISTINCT s.sale_id) AS num_sales\n"
                    f"FROM sales s\n{_date_filter('s.sale_date', q)};"
                ),
            ),
            MemoryStep(
                index=3,
                description=(
                    f"Calculate the average weight of fruit per sales transaction {phrase}, "
                    "replace <total_weight> and <num_sales> with the results from the previous queries"
                ),
                sql_template=(
                    "SELECT ROUND(1.0 * <total_weight> / <num_sales>, 2) AS avg_weight_per_sale;"
                ),
                bindings=(
                    PlaceholderBinding("total_weight", source_step=1, column="total_weight"),
                    PlaceholderBinding("num_sales", source_step=2, column="num_sales"),
                ),
            ),
        ]
    if k == "fruit_revenue":
        return _one_step(
            f"Calculate the total revenue from sales of {q.fruit}",
            "SELECT ROUND(SUM(si.item_total_price), 2) AS fruit_revenue\n"
            "FROM sale_items si\n"
            "JOIN fruits f ON si.fruit_id = f.fruit_id\n"
            f"WHERE f.fruit_name = {_q(q.fruit)};",
        )
    if k == "top_customer":
        return _one_step(
            "Find the customer with the highest total spend",
            "SELECT c.first_name, c.last_name, ROUND(SUM(s.total_price), 2) AS total_spent\n"
            "FROM sales s\n"
            "JOIN customers c ON s.customer_id = c.customer_id\n"
            "GROUP BY c.customer_id, c.first_name, c.last_name\n"
            "ORDER BY total_spent DESC, c.first_name ASC, c.last_name ASC LIMIT 1;",
        )
    if k == "valid_sales":
        return _one_step(
            f"Count the valid sales transactions {phrase}",
            f"SELECT COUNT(*) AS num_sales\nFROM sales\n{_date_filter('sale_date', q)};",
        )
    if k == "purchase_cost_range":
        return _one_step(
            f"Calculate the total purchase cost {phrase}",
            "SELECT ROUND(SUM(total_cost), 2) AS total_purchase_cost\n"
            f"FROM purchases\n{_date_filter('purchase_date', q)};",
        )
    if k == "best_fruit":
        return _one_step(
            "Find the best-selling fruit by weight",
            "SELECT f.fruit_name, SUM(si.quantity_sold) AS total_kg\n"
            "FROM sale_items si\n"
            "JOIN fruits f ON si.fruit_id = f.fruit_id\n"
            "GROUP BY f.fruit_name\n"
            "ORDER BY total_kg DESC, f.fruit_name ASC LIMIT 1;",
        )
    if k == "top_supplier":
        return _one_step(
            "Find the supplier who provided the most fruit by weight",
            "SELECT sup.supplier_name, SUM(pi.quantity_purchased) AS total_kg\n"
            "FROM purchase_items pi\n"
            "JOIN purchases p ON pi.purchase_id = p.purchase_id\n"
            "JOIN suppliers sup ON p.supplier_id = sup.supplier_id\n"
            "GROUP BY sup.supplier_name\n"
            "ORDER BY total_kg DESC, sup.supplier_name ASC LIMIT 1;",
        )
    if k == "avg_sale_value":
        return [
            MemoryStep(
                index=1,
                description=f"Calculate the total revenue {phrase}",
                sql_template=(
                    "SELECT SUM(total_price) AS total_revenue\n"
                    f"FROM sales\n{_date_filter('sale_date', q)};"
                ),
            ),
            MemoryStep(
                index=2,
                description=f"Count the number of sales transactions {phrase}",
                sql_template=(
                    f"SELECT COUNT(*) AS num_sales\nFROM sales\n{_date_filter('sale_date', q)};"
                ),
            ),
            MemoryStep(
                index=3,
                description=(
                    f"Calculate the average value of a sales transaction {phrase}, "
                    "replace <total_revenue> and <num_sales> with the results from the previous queries"
                ),
                sql_template=(
                    "SELECT ROUND(1.0 * <total_revenue> / <num_sales>, 2) AS avg_sale_value;"
                ),
                bindings=(
                    PlaceholderBinding("total_revenue", source_step=1, column="total_revenue"),
                    PlaceholderBinding("num_sales", source_step=2, column="num_sales"),
                ),
            ),
        ]
    raise ValueError(f"unknown question kind {k!r}")


def _one_step(description: str, sql: str) -> list[MemoryStep]:
    return [MemoryStep(index=1, description=description, sql_template=sql)]


def _range_phrase(q: QuestionSpec) -> str:
    from ..fruitshop.questions import month_phrase

    if q.month_form:
        return f"for {month_phrase(q.start[:7])}"
    if q.start:
        return f"from {q.start} to {q.end}"
    return "overall"


def _date_filter(column: str, q: QuestionSpec) -> str:
    """Month windows use >= / < of the next month like the exemplar queries;
    explicit windows use BETWEEN (inclusive both ends). Same rows either way."""
    if q.month_form:
        first = q.start
        year, mon = int(first[:4]), int(first[5:7])
        if mon == 12:
            nxt = f"{year + 1:04d}-01-01"
        else:
            nxt = f"{year:04d}-{mon + 1:02d}-01"
        return f"WHERE {column} >= '{first}' AND {column} < '{nxt}'"
    return f"WHERE {column} BETWEEN '{q.start}' AND '{q.end}'"
