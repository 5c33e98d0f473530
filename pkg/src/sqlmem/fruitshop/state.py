"""Brute-force shop simulator: the ground-truth side of every check.

ShopState tracks exactly what the relational memory is supposed to hold
(stock, prices, live sales, purchases) but is computed by plain Python
arithmetic over Decimals, never through SQL. It doubles as the generator's
validity guard: ``apply_record`` raises OracleViolation instead of ever
producing an inconsistent history.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal

from ..errors import OracleViolation
from .records import PriceChange, Purchase, Return, Sale, ShopRecord


@dataclass(frozen=True)
class LedgerLine:
    fruit: str
    quantity: int
    unit_price: Decimal

    @property
    def line_total(self) -> Decimal:
        return self.unit_price * self.quantity


@dataclass(frozen=True)
class SaleEntry:
    date: str
    customer_phone: str
    customer_name: str
    lines: tuple[LedgerLine, ...]

    @property
    def total(self) -> Decimal:
        return sum((line.line_total for line in self.lines), Decimal(0))


@dataclass(frozen=True)
class PurchaseEntry:
    date: str
    supplier: str
    lines: tuple[LedgerLine, ...]  # unit_price is the unit cost here

    @property
    def total(self) -> Decimal:
        return sum((line.line_total for line in self.lines), Decimal(0))


@dataclass
class ShopState:
    stock: dict[str, int] = field(default_factory=dict)
    price: dict[str, Decimal | None] = field(default_factory=dict)
    suppliers: dict[str, tuple[str, str]] = field(default_factory=dict)  # name -> (phone, email)
    customers: dict[str, tuple[str, str, str]] = field(default_factory=dict)  # phone -> (first, last, email)
    live_sales: list[SaleEntry] = field(default_factory=list)
    purchases: list[PurchaseEntry] = field(default_factory=list)
    sale_keys: set[tuple[str, str]] = field(default_factory=set)  # (phone, date) ever used

    def copy(self) -> "ShopState":
        return ShopState(
            stock=dict(self.stock),
            price=dict(self.price),
            suppliers=dict(self.suppliers),
            customers=dict(self.customers),
            live_sales=list(self.live_sales),
            purchases=list(self.purchases),
            sale_keys=set(self.sale_keys),
        )

    def check(self) -> None:
        for fruit, qty in self.stock.items():
            if qty < 0:
                raise OracleViolation(f"negative stock for {fruit}: {qty}")


def apply_record(state: ShopState, record: ShopRecord) -> ShopState:
    """Return the state after ``record``; raises OracleViolation when invalid."""
    new = state.copy()

    if isinstance(record, Purchase):
        new.suppliers.setdefault(record.supplier.name, (record.supplier.phone, record.supplier.email))
        lines = []
        for item in record.items:
            if item.quantity <= 0:
                raise OracleViolation(f"non-positive purchase quantity for {item.fruit}")
            new.stock[item.fruit] = new.stock.get(item.fruit, 0) + item.quantity
            new.price.setdefault(item.fruit, None)
            lines.append(LedgerLine(item.fruit, item.quantity, item.unit_cost))
        for fruit, price in record.new_prices:
            if fruit not in new.stock:
                raise OracleViolation(f"price given for fruit outside this purchase: {fruit}")
            new.price[fruit] = price
        new.purchases.append(
            PurchaseEntry(date=record.date, supplier=record.supplier.name, lines=tuple(lines))
        )

    elif isinstance(record, Sale):
        key = (record.customer.phone, record.date)
        if key in new.sale_keys:
            raise OracleViolation(
                f"second sale for customer {record.customer.phone} on {record.date} "
                "(return lookups would be ambiguous)"
            )
        new.customers.setdefault(
            record.customer.phone,
            (record.customer.first_name, record.customer.last_name, record.customer.email),
        )
        lines = []
        for item in record.items:
            if item.fruit not in new.stock:
                raise OracleViolation(f"sale of unknown fruit {item.fruit}")
            price = new.price.get(item.fruit)
            if price is None:
                raise OracleViolation(f"sale of unpriced fruit {item.fruit}")
            if item.quantity <= 0:
                raise OracleViolation(f"non-positive sale quantity for {item.fruit}")
            if item.quantity > new.stock[item.fruit]:
                raise OracleViolation(
                    f"sale of {item.quantity} kg {item.fruit} exceeds stock {new.stock[item.fruit]}"
                )
            new.stock[item.fruit] -= item.quantity
            lines.append(LedgerLine(item.fruit, item.quantity, price))
        new.live_sales.append(
            SaleEntry(
                date=record.date,
                customer_phone=record.customer.phone,
                customer_name=record.customer.full_name,
                lines=tuple(lines),
            )
        )
        new.sale_keys.add(key)

    elif isinstance(record, Return):
        matches = [
            s
            for s in new.live_sales
            if s.customer_phone == record.customer.phone and s.date == record.sale_date
        ]
        if len(matches) != 1:
            raise OracleViolation(
                f"return must match exactly one live sale, matched {len(matches)} "
                f"for {record.customer.phone} on {record.sale_date}"
            )
        sale = matches[0]
        for line in sale.lines:
            new.stock[line.fruit] += line.quantity
        new.live_sales.remove(sale)

    elif isinstance(record, PriceChange):
        if record.fruit not in new.stock:
            raise OracleViolation(f"price change for unknown fruit {record.fruit}")
        new.price[record.fruit] = record.new_price

    else:
        raise TypeError(f"not a shop record: {record!r}")

    new.check()
    return new


def replay(records) -> ShopState:
    """Fold a record sequence into the final state (validating every prefix)."""
    state = ShopState()
    for record in records:
        state = apply_record(state, record)
    return state
