"""Synthetic shop history and question-set generation.

The generator walks day by day through one month, emitting records that
are valid by construction: every candidate record is applied to the
oracle simulator before it is accepted, so sales never oversell stock,
returns always match exactly one live sale, and no customer buys twice on
the same date (which would make return lookups ambiguous).

Question selection: the whole-month revenue question and each singleton
hard template are always included once; the remaining quota is filled
round-robin from the parameterized template buckets (per-fruit lookups,
date-window aggregates) so every template family stays represented.
Candidates whose oracle answer is undefined are skipped.

Value ranges keep the arithmetic human-checkable: prices 0.5-5.0 dollars
in 0.1 steps, quantities 1-25 kg, 5-12 fruit kinds, 4-8 suppliers, 6-12
customers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import date as date_type, timedelta
from decimal import Decimal
from pathlib import Path

from ..errors import DatasetError, InfeasibleConfig, OracleViolation, UndefinedAnswer
from .questions import (
    Question,
    QuestionSpec,
    answer_from_dict,
    answer_to_dict,
    make_question,
    month_bounds,
)
from .records import (
    Customer,
    PriceChange,
    Purchase,
    PurchaseItem,
    Return,
    Sale,
    SaleItem,
    ShopRecord,
    Supplier,
    parse_record_text,
    record_from_dict,
    record_to_dict,
    render_record,
)
from .state import ShopState, apply_record

DATASET_FORMAT = "fruit-shop-dataset"
DATASET_VERSION = 1

FRUIT_POOL = (
    "apple", "banana", "cherry", "grape", "kiwi", "lemon",
    "mango", "orange", "peach", "pear", "plum", "strawberry",
)
SUPPLIER_POOL = (
    "ABC", "FreshFarm", "GreenLeaf", "SunGrove", "Orchardia",
    "HarvestHub", "RipeRoute", "FruitExpress",
)
FIRST_NAMES = (
    "Alice", "Bob", "Carol", "David", "Emma", "Frank",
    "Grace", "Henry", "Ivy", "Jack", "Karen", "Leo",
)
LAST_NAMES = (
    "Smith", "Doe", "Davis", "Brown", "Wilson", "Taylor",
    "Clark", "Lewis", "Young", "Walker", "Hall", "Allen",
)

MIN_RETURNS = 3


@dataclass
class GenConfig:
    n_records: int = 70
    n_easy: int = 15
    n_hard: int = 35
    month: str = "2023-01"

    def validate(self) -> None:
        if self.n_records < 0 or self.n_easy < 0 or self.n_hard < 0:
            raise InfeasibleConfig("record and question counts must be non-negative")
        if len(self.month) != 7 or self.month[4] != "-":
            raise InfeasibleConfig(f"month must be YYYY-MM, got {self.month!r}")


@dataclass
class Dataset:
    seed: int
    month: str
    records: list[tuple[ShopRecord, str]]
    questions: list[Question]
    final_state: ShopState
    token_estimate: int = 0
    n_easy: int = 0
    n_hard: int = 0

    def record_texts(self) -> list[str]:
        return [text for _r, text in self.records]


def _price(rng: random.Random) -> Decimal:
    return Decimal(rng.randint(5, 50)) / 10  # 0.5 .. 5.0 in 0.1 steps


class _Generator:
    def __init__(self, seed: int, config: GenConfig):
        self.rng = random.Random(seed)
        self.config = config
        self.state = ShopState()
        first, last = month_bounds(config.month)
        self.first_day = date_type.fromisoformat(first)
        self.last_day = date_type.fromisoformat(last)
        self.day = self.first_day

        self.fruits = sorted(self.rng.sample(FRUIT_POOL, self.rng.randint(5, 12)))
        self.suppliers = [
            Supplier(name=name, phone=str(10080 + i), email=f"{name.lower()}_sup@example.com")
            for i, name in enumerate(self.rng.sample(SUPPLIER_POOL, self.rng.randint(4, 8)))
        ]
        pairs = [(f, l) for f in FIRST_NAMES for l in LAST_NAMES]
        chosen = self.rng.sample(pairs, self.rng.randint(6, 12))
        self.customers = [
            Customer(
                first_name=f,
                last_name=l,
                phone=f"123-456-78{10 + i}",
                email=f"{f.lower()}.{l.lower()}@example.com",
            )
            for i, (f, l) in enumerate(chosen)
        ]
        self.counts = {"purchase": 0, "sale": 0, "return": 0, "price_change": 0}

    # -- record construction -------------------------------------------------

    def _sellable(self) -> list[str]:
        return [
            f
            for f in self.fruits
            if self.state.stock.get(f, 0) > 0 and self.state.price.get(f) is not None
        ]

    def _free_customers(self) -> list[Customer]:
        day = self.day.isoformat()
        return [c for c in self.customers if (c.phone, day) not in self.state.sale_keys]

    def _returnable(self):
        return list(self.state.live_sales)

    def _feasible(self) -> dict[str, bool]:
        return {
            "purchase": True,
            "sale": bool(self._sellable()) and bool(self._free_customers()),
            "return": bool(self._returnable()),
            "price_change": bool(self.state.stock),
        }

    def _make_purchase(self) -> Purchase:
        supplier = self.rng.choice(self.suppliers)
        k = self.rng.randint(1, min(3, len(self.fruits)))
        chosen = self.rng.sample(self.fruits, k)
        items = tuple(
            PurchaseItem(fruit=f, quantity=self.rng.randint(1, 25), unit_cost=_price(self.rng))
            for f in chosen
        )
        new_prices = []
        for item in items:
            is_new = item.fruit not in self.state.stock
            if is_new or self.rng.random() < 0.25:
                new_prices.append((item.fruit, _price(self.rng)))
        return Purchase(
            date=self.day.isoformat(),
            supplier=supplier,
            items=items,
            new_prices=tuple(new_prices),
        )

    def _make_sale(self) -> Sale:
        sellable = self._sellable()
        k = self.rng.randint(1, min(3, len(sellable)))
        chosen = self.rng.sample(sellable, k)
        items = tuple(
            SaleItem(fruit=f, quantity=self.rng.randint(1, min(25, self.state.stock[f])))
            for f in chosen
        )
        customer = self.rng.choice(self._free_customers())
        return Sale(date=self.day.isoformat(), customer=customer, items=items)

    def _make_return(self) -> Return:
        sale = self.rng.choice(self._returnable())
        first, last, email = self.state.customers[sale.customer_phone]
        customer = Customer(first_name=first, last_name=last, phone=sale.customer_phone, email=email)
        return Return(date=self.day.isoformat(), customer=customer, sale_date=sale.date)

    def _make_price_change(self) -> PriceChange:
        fruit = self.rng.choice(sorted(self.state.stock))
        return PriceChange(date=self.day.isoformat(), fruit=fruit, new_price=_price(self.rng))

    def _pick_kind(self, remaining: int) -> str:
        feasible = self._feasible()
        if not self.counts["purchase"]:
            return "purchase"
        # Force outstanding requirements when slots run short.
        need: list[str] = []
        need += ["return"] * max(0, MIN_RETURNS - self.counts["return"])
        need += [k for k in ("sale", "price_change") if not self.counts[k]]
        need = [k for k in need if feasible[k]]
        if need and remaining <= len(need):
            return need[0]
        weights = {"purchase": 0.30, "sale": 0.45, "return": 0.12, "price_change": 0.13}
        kinds = [k for k in weights if feasible[k]]
        return self.rng.choices(kinds, weights=[weights[k] for k in kinds])[0]

    def _advance_day(self, remaining: int) -> None:
        days_left = (self.last_day - self.day).days
        if days_left <= 0 or remaining <= 0:
            return
        if self.rng.random() < min(1.0, days_left / remaining):
            self.day += timedelta(days=1)

    def records(self) -> list[ShopRecord]:
        out: list[ShopRecord] = []
        makers = {
            "purchase": self._make_purchase,
            "sale": self._make_sale,
            "return": self._make_return,
            "price_change": self._make_price_change,
        }
        for i in range(self.config.n_records):
            remaining = self.config.n_records - i
            kind = self._pick_kind(remaining)
            record = makers[kind]()
            self.state = apply_record(self.state, record)
            self.counts[kind] += 1
            out.append(record)
            self._advance_day(remaining - 1)
        if self.config.n_records:
            missing = [k for k, n in self.counts.items() if n == 0]
            if missing:
                raise InfeasibleConfig(f"could not place record kinds: {missing}")
            if self.counts["return"] < MIN_RETURNS:
                raise InfeasibleConfig(
                    f"only {self.counts['return']} returns, need {MIN_RETURNS}"
                )
        return out

    # -- question selection ---------------------------------------------------

    def _candidate_buckets(self, difficulty: str) -> list[list[QuestionSpec]]:
        state = self.state
        start, end = month_bounds(self.config.month)
        if difficulty == "easy":
            return [
                [QuestionSpec("stock", fruit=f) for f in sorted(state.stock)],
                [QuestionSpec("price", fruit=f) for f in sorted(state.stock) if state.price.get(f)],
                [QuestionSpec("customers")],
                [QuestionSpec("suppliers")],
                [
                    QuestionSpec("kg_purchased", fruit=f)
                    for f in sorted({l.fruit for p in state.purchases for l in p.lines})
                ],
            ]
        sale_dates = sorted({s.date for s in state.live_sales})
        purchase_dates = sorted({p.date for p in state.purchases})
        sold_fruits = sorted({l.fruit for s in state.live_sales for l in s.lines})
        revenue_windows = [
            QuestionSpec("revenue_range", start=a, end=b)
            for i, a in enumerate(sale_dates)
            for b in sale_dates[i:]
            if (a, b) != (start, end)
        ]
        cost_windows = [
            QuestionSpec("purchase_cost_range", start=a, end=b)
            for i, a in enumerate(purchase_dates)
            for b in purchase_dates[i:]
        ]
        return [
            [QuestionSpec("revenue_range", start=start, end=end, month_form=True)],
            [QuestionSpec("best_day", start=start, end=end, month_form=True)],
            [QuestionSpec("avg_weight", start=start, end=end, month_form=True)],
            [QuestionSpec("top_customer")],
            [QuestionSpec("valid_sales", start=start, end=end, month_form=True)],
            [QuestionSpec("best_fruit")],
            [QuestionSpec("top_supplier")],
            [QuestionSpec("avg_sale_value", start=start, end=end, month_form=True)],
            [QuestionSpec("fruit_revenue", fruit=f) for f in sold_fruits],
            revenue_windows,
            cost_windows,
        ]

    def questions(self, difficulty: str, quota: int) -> list[Question]:
        """Fill the quota round-robin across template buckets."""
        buckets = self._candidate_buckets(difficulty)
        for bucket in buckets:
            self.rng.shuffle(bucket)
        chosen: list[Question] = []
        seen_texts: set[str] = set()
        while len(chosen) < quota:
            progressed = False
            for bucket in buckets:
                if len(chosen) >= quota:
                    break
                while bucket:
                    spec = bucket.pop()
                    try:
                        q = make_question(spec, self.state, self.config.month)
                    except UndefinedAnswer:
                        continue
                    if q.text in seen_texts:
                        continue
                    seen_texts.add(q.text)
                    chosen.append(q)
                    progressed = True
                    break
            if not progressed:
                raise InfeasibleConfig(
                    f"only {len(chosen)} {difficulty} questions available, need {quota}"
                )
        return chosen


def generate_dataset(seed: int, config: GenConfig | None = None) -> Dataset:
    """Deterministically generate a dataset for ``seed``."""
    config = config or GenConfig()
    config.validate()
    gen = _Generator(seed, config)
    records = gen.records()
    rendered = [(r, render_record(r)) for r in records]
    for record, text in rendered:
        if parse_record_text(text) != record:
            raise OracleViolation(f"record does not round-trip through its rendering: {text}")
    questions = gen.questions("easy", config.n_easy) + gen.questions("hard", config.n_hard)
    token_estimate = sum(len(text) for _r, text in rendered) // 4
    return Dataset(
        seed=seed,
        month=config.month,
        records=rendered,
        questions=questions,
        final_state=gen.state,
        token_estimate=token_estimate,
        n_easy=config.n_easy,
        n_hard=config.n_hard,
    )


# -- serialization (line-delimited JSON, header first) ------------------------


def dataset_to_lines(dataset: Dataset) -> list[str]:
    header = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "seed": dataset.seed,
        "month": dataset.month,
        "n_records": len(dataset.records),
        "n_easy": dataset.n_easy,
        "n_hard": dataset.n_hard,
        "token_estimate": dataset.token_estimate,
    }
    lines = [json.dumps(header)]
    for record, text in dataset.records:
        lines.append(json.dumps({"kind": "record", "record": record_to_dict(record), "text": text}))
    for q in dataset.questions:
        lines.append(
            json.dumps(
                {
                    "kind": "question",
                    "template": q.template,
                    "difficulty": q.difficulty,
                    "text": q.text,
                    "answer": answer_to_dict(q.answer),
                }
            )
        )
    return lines


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_text("\n".join(dataset_to_lines(dataset)) + "\n")


def save_transcript(dataset: Dataset, path: str | Path) -> None:
    """Human-readable record history in the baseline-prompt layout:
    one record per line, surrounded by triple backticks."""
    body = "\n".join(dataset.record_texts())
    Path(path).write_text(f"```\n{body}\n```\n")


def load_dataset(path: str | Path, validate: bool = True) -> Dataset:
    """Read a dataset file; ``validate`` replays every record through the oracle.

    Validation makes record order-sensitivity detectable: a shuffled file
    raises OracleViolation (a return before its sale, a sale before stock).
    """
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise DatasetError(f"{path}: empty dataset file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: bad header: {exc}") from exc
    if header.get("format") != DATASET_FORMAT:
        raise DatasetError(f"{path}: not a {DATASET_FORMAT} file")

    records: list[tuple[ShopRecord, str]] = []
    questions: list[Question] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}:{lineno}: bad JSON: {exc}") from exc
        if data.get("kind") == "record":
            records.append((record_from_dict(data["record"]), data["text"]))
        elif data.get("kind") == "question":
            questions.append(
                Question(
                    text=data["text"],
                    difficulty=data["difficulty"],
                    answer=answer_from_dict(data["answer"]),
                    template=data.get("template", ""),
                )
            )
        else:
            raise DatasetError(f"{path}:{lineno}: unknown line kind {data.get('kind')!r}")

    state = ShopState()
    if validate:
        for record, _text in records:
            state = apply_record(state, record)

    n_easy = sum(1 for q in questions if q.difficulty == "easy")
    return Dataset(
        seed=int(header.get("seed", 0)),
        month=header["month"],
        records=records,
        questions=questions,
        final_state=state,
        token_estimate=int(header.get("token_estimate", 0)),
        n_easy=n_easy,
        n_hard=len(questions) - n_easy,
    )
