"""Shop event records and their fixed natural-language renderings.

Four record variants cover the shop's life: restocking purchases, sales,
returns (which undo a whole prior sale) and price changes. Each variant has
exactly one sentence template; ``parse_record_text`` is the strict inverse
of ``render_record`` over those templates, which is what lets the rule
planner consume rendered records mechanically.

Money is carried as Decimal end to end here; the database side only ever
sees the rendered text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Union


@dataclass(frozen=True)
class Supplier:
    name: str
    phone: str
    email: str


@dataclass(frozen=True)
class Customer:
    first_name: str
    last_name: str
    phone: str
    email: str

    @property
    def full_name(self) -> str:
        return f"{self.first_name} {self.last_name}"


@dataclass(frozen=True)
class PurchaseItem:
    fruit: str
    quantity: int  # kg
    unit_cost: Decimal


@dataclass(frozen=True)
class SaleItem:
    fruit: str
    quantity: int  # kg


@dataclass(frozen=True)
class Purchase:
    date: str
    supplier: Supplier
    items: tuple[PurchaseItem, ...]
    new_prices: tuple[tuple[str, Decimal], ...] = ()


@dataclass(frozen=True)
class Sale:
    date: str
    customer: Customer
    items: tuple[SaleItem, ...]


@dataclass(frozen=True)
class Return:
    date: str
    customer: Customer
    sale_date: str


@dataclass(frozen=True)
class PriceChange:
    date: str
    fruit: str
    new_price: Decimal


ShopRecord = Union[Purchase, Sale, Return, PriceChange]


def money(value) -> str:
    """Render a Decimal price the way records spell it (no trailing zeros)."""
    text = str(value)
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def render_record(record: ShopRecord) -> str:
    """One fixed sentence per variant, slots filled."""
    if isinstance(record, Purchase):
        quantities = ", ".join(f"{i.quantity} kg {i.fruit}" for i in record.items)
        costs = ", ".join(money(i.unit_cost) for i in record.items)
        text = (
            f"We restocked our store on {record.date} with a new supply of fruits "
            f"from '{record.supplier.name}' ({record.supplier.email}, {record.supplier.phone}). "
            f"The purchased quantities include {quantities}, at unit prices of {costs}."
        )
        for fruit, price in record.new_prices:
            text += f" Our intended selling price of {fruit} is {money(price)} dollars per unit."
        return text
    if isinstance(record, Sale):
        items = ", ".join(f"{i.quantity} kg {i.fruit}" for i in record.items)
        c = record.customer
        return (
            f"A sale was made on {record.date} to '{c.full_name}' "
            f"(contact details: {c.phone}, {c.email}). "
            f"The items purchased were {items}."
        )
    if isinstance(record, Return):
        c = record.customer
        return (
            f"On {record.date}, because the customer returned their purchase, "
            f"we are required to undo the sales transaction made by customer "
            f"'{c.full_name}' (phone: {c.phone}, email: {c.email}) on {record.sale_date}."
        )
    if isinstance(record, PriceChange):
        return (
            f"On {record.date}, the sale price of {record.fruit} in the store "
            f"was changed to {money(record.new_price)} dollar per unit."
        )
    raise TypeError(f"not a shop record: {record!r}")


_DATE = r"(\d{4}-\d{2}-\d{2})"
_ITEM_RE = re.compile(r"(\d+) kg ([a-z]+)")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")

_PURCHASE_RE = re.compile(
    rf"^We restocked our store on {_DATE} with a new supply of fruits "
    rf"from '([^']+)' \(([^,()]+), ([^()]+)\)\. "
    rf"The purchased quantities include (.+?), at unit prices of ([^.]+(?:\.\d+)?(?:, [^.]+(?:\.\d+)?)*)\.(.*)$"
)
_NEW_PRICE_RE = re.compile(
    r"Our intended selling price of ([a-z]+) is (\d+(?:\.\d+)?) dollars per unit\."
)
_SALE_RE = re.compile(
    rf"^A sale was made on {_DATE} to '([^']+)' \(contact details: ([^,()]+), ([^()]+)\)\. "
    rf"The items purchased were (.+)\.$"
)
_RETURN_RE = re.compile(
    rf"^On {_DATE}, because the customer returned their purchase, "
    rf"we are required to undo the sales transaction made by customer "
    rf"'([^']+)' \(phone: ([^,()]+), email: ([^()]+)\) on {_DATE}\.$"
)
_PRICE_CHANGE_RE = re.compile(
    rf"^On {_DATE}, the sale price of ([a-z]+) in the store "
    rf"was changed to (\d+(?:\.\d+)?) dollars? per unit\.$"
)


def _split_name(full_name: str) -> tuple[str, str]:
    first, _, last = full_name.partition(" ")
    return first, last


def parse_record_text(text: str) -> ShopRecord | None:
    """Recover a ShopRecord from rendered text; None when nothing matches."""
    text = text.strip()

    m = _PURCHASE_RE.match(text)
    if m:
        date, supplier_name, email, phone, quantities, costs, tail = m.groups()
        items_raw = _ITEM_RE.findall(quantities)
        costs_raw = _NUMBER_RE.findall(costs)
        if not items_raw or len(items_raw) != len(costs_raw):
            return None
        items = tuple(
            PurchaseItem(fruit=fruit, quantity=int(qty), unit_cost=Decimal(cost))
            for (qty, fruit), cost in zip(items_raw, costs_raw)
        )
        new_prices = tuple(
            (fruit, Decimal(price)) for fruit, price in _NEW_PRICE_RE.findall(tail)
        )
        return Purchase(
            date=date,
            supplier=Supplier(name=supplier_name, phone=phone, email=email),
            items=items,
            new_prices=new_prices,
        )

    m = _SALE_RE.match(text)
    if m:
        date, full_name, phone, email, items_text = m.groups()
        items_raw = _ITEM_RE.findall(items_text)
        if not items_raw:
            return None
        first, last = _split_name(full_name)
        return Sale(
            date=date,
            customer=Customer(first_name=first, last_name=last, phone=phone, email=email),
            items=tuple(SaleItem(fruit=fruit, quantity=int(qty)) for qty, fruit in items_raw),
        )

    m = _RETURN_RE.match(text)
    if m:
        date, full_name, phone, email, sale_date = m.groups()
        first, last = _split_name(full_name)
        return Return(
            date=date,
            customer=Customer(first_name=first, last_name=last, phone=phone, email=email),
            sale_date=sale_date,
        )

    m = _PRICE_CHANGE_RE.match(text)
    if m:
        date, fruit, price = m.groups()
        return PriceChange(date=date, fruit=fruit, new_price=Decimal(price))

    return None


def record_kind(record: ShopRecord) -> str:
    return type(record).__name__.lower()


def record_to_dict(record: ShopRecord) -> dict:
    """JSON-friendly view of a record (Decimals as strings)."""
    if isinstance(record, Purchase):
        return {
            "kind": "purchase",
            "date": record.date,
            "supplier": {
                "name": record.supplier.name,
                "phone": record.supplier.phone,
                "email": record.supplier.email,
            },
            "items": [
                {"fruit": i.fruit, "quantity": i.quantity, "unit_cost": str(i.unit_cost)}
                for i in record.items
            ],
            "new_prices": [[fruit, str(price)] for fruit, price in record.new_prices],
        }
    if isinstance(record, Sale):
        return {
            "kind": "sale",
            "date": record.date,
            "customer": {
                "first_name": record.customer.first_name,
                "last_name": record.customer.last_name,
                "phone": record.customer.phone,
                "email": record.customer.email,
            },
            "items": [{"fruit": i.fruit, "quantity": i.quantity} for i in record.items],
        }
    if isinstance(record, Return):
        return {
            "kind": "return",
            "date": record.date,
            "customer": {
                "first_name": record.customer.first_name,
                "last_name": record.customer.last_name,
                "phone": record.customer.phone,
                "email": record.customer.email,
            },
            "sale_date": record.sale_date,
        }
    if isinstance(record, PriceChange):
        return {
            "kind": "price_change",
            "date": record.date,
            "fruit": record.fruit,
            "new_price": str(record.new_price),
        }
    raise TypeError(f"not a shop record: {record!r}")


def record_from_dict(data: dict) -> ShopRecord:
    kind = data.get("kind")
    if kind == "purchase":
        return Purchase(
            date=data["date"],
            supplier=Supplier(**data["supplier"]),
            items=tuple(
                PurchaseItem(i["fruit"], int(i["quantity"]), Decimal(i["unit_cost"]))
                for i in data["items"]
            ),
            new_prices=tuple((f, Decimal(p)) for f, p in data["new_prices"]),
        )
    if kind == "sale":
        return Sale(
            date=data["date"],
            customer=Customer(**data["customer"]),
            items=tuple(SaleItem(i["fruit"], int(i["quantity"])) for i in data["items"]),
        )
    if kind == "return":
        return Return(
            date=data["date"],
            customer=Customer(**data["customer"]),
            sale_date=data["sale_date"],
        )
    if kind == "price_change":
        return PriceChange(
            date=data["date"], fruit=data["fruit"], new_price=Decimal(data["new_price"])
        )
    raise ValueError(f"unknown record kind {kind!r}")
