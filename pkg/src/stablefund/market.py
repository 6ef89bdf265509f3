"""Secondary market: one continuous limit order book per campaign token.

Prices are coin minor units per whole token (10**6 token units), so a fill of
``qty`` units at ``price`` costs ``floor(qty * price / 10**6)`` minor units.
Orders match at the resting order's price with price-time priority
(best price, then earliest ``placed_at``, then lowest ``order_id``).

Open orders hold reservations: tokens for sells, and for buys the cost of the
remaining quantity at the limit price. A buy's reservation is recomputed from
its remaining quantity after each fill and the excess released, which is never
less than what the fill paid because flooring is superadditive.
"""

from __future__ import annotations

import bisect
import enum
from collections import deque
from dataclasses import dataclass

from .amount import UNIT
from .compliance import CONTRIBUTE, Compliance
from .errors import AlreadyClosed, GateDenied, InvalidOrder, InvariantViolation, NotOwner, UnknownOrder
from .ledger import Ledger
from .tokenization import Tokens


class Side(str, enum.Enum):
    BUY = "Buy"
    SELL = "Sell"


class OrderStatus(str, enum.Enum):
    OPEN = "Open"
    PARTIALLY_FILLED = "PartiallyFilled"
    FILLED = "Filled"
    CANCELLED = "Cancelled"


def trade_value(quantity: int, price: int) -> int:
    return quantity * price // UNIT


@dataclass
class Order:
    order_id: int
    campaign_id: str
    side: Side
    trader: str
    quantity: int
    limit_price: int
    placed_at: int
    original_quantity: int = 0
    status: OrderStatus = OrderStatus.OPEN

    @property
    def is_open(self) -> bool:
        return self.status in (OrderStatus.OPEN, OrderStatus.PARTIALLY_FILLED)

    def reservation(self) -> int:
        """Coins (buys) or token units (sells) this order currently holds."""
        if not self.is_open:
            return 0
        if self.side is Side.BUY:
            return trade_value(self.quantity, self.limit_price)
        return self.quantity


@dataclass(frozen=True)
class Trade:
    trade_id: int
    campaign_id: str
    buy_order_id: int
    sell_order_id: int
    buyer: str
    seller: str
    quantity: int
    price: int
    value: int
    executed_at: int

    def to_dict(self) -> dict:
        return {
            "trade_id": self.trade_id,
            "campaign": self.campaign_id,
            "buy_order_id": self.buy_order_id,
            "sell_order_id": self.sell_order_id,
            "buyer": self.buyer,
            "seller": self.seller,
            "quantity": self.quantity,
            "price": self.price,
            "value": self.value,
            "executed_at": self.executed_at,
        }


@dataclass(frozen=True)
class BookSnapshot:
    bids: list[tuple[int, int]]
    asks: list[tuple[int, int]]


class OrderBook:
    """Price levels as FIFO deques; level prices kept sorted ascending."""

    def __init__(self):
        self.levels = {Side.BUY: {}, Side.SELL: {}}
        self.prices = {Side.BUY: [], Side.SELL: []}

    def add(self, order: Order) -> None:
        levels = self.levels[order.side]
        if order.limit_price not in levels:
            levels[order.limit_price] = deque()
            bisect.insort(self.prices[order.side], order.limit_price)
        levels[order.limit_price].append(order)

    def remove(self, order: Order) -> None:
        level = self.levels[order.side][order.limit_price]
        level.remove(order)
        self._drop_if_empty(order.side, order.limit_price)

    def _drop_if_empty(self, side: Side, price: int) -> None:
        if not self.levels[side][price]:
            del self.levels[side][price]
            prices = self.prices[side]
            prices.pop(bisect.bisect_left(prices, price))

    def best(self, side: Side) -> Order | None:
        prices = self.prices[side]
        if not prices:
            return None
        price = prices[-1] if side is Side.BUY else prices[0]
        return self.levels[side][price][0]

    def pop_best(self, side: Side) -> Order:
        order = self.best(side)
        self.levels[side][order.limit_price].popleft()
        self._drop_if_empty(side, order.limit_price)
        return order

    def snapshot(self) -> BookSnapshot:
        def agg(side):
            return [(p, sum(o.quantity for o in self.levels[side][p])) for p in self.prices[side]]
        return BookSnapshot(bids=agg(Side.BUY)[::-1], asks=agg(Side.SELL))


def crosses(incoming: Order, resting: Order) -> bool:
    if incoming.side is Side.BUY:
        return incoming.limit_price >= resting.limit_price
    return resting.limit_price >= incoming.limit_price


class Market:
    def __init__(self, ledger: Ledger, compliance: Compliance, tokens: Tokens, campaigns):
        self.ledger = ledger
        self.compliance = compliance
        self.tokens = tokens
        self.campaigns = campaigns
        self.orders: dict[int, Order] = {}
        self.trades: list[Trade] = []
        self.books: dict[str, OrderBook] = {}
        self._next_order_id = 1

    def place_order(self, campaign_id: str, trader: str, side: Side | str, quantity: int,
                    limit_price: int) -> tuple[list[Trade], Order]:
        self.campaigns.get(campaign_id)
        self.ledger.require(trader)
        try:
            side = Side(side)
        except ValueError:
            raise InvalidOrder(f"unknown side {side!r}") from None
        for name, v in (("quantity", quantity), ("limit_price", limit_price)):
            if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                raise InvalidOrder(f"{name} must be a positive integer, got {v!r}")
        self.tokens.cap_table(campaign_id)
        notional = trade_value(quantity, limit_price)
        decision = self.compliance.check_gate(trader, CONTRIBUTE, notional)
        if not decision:
            raise GateDenied(trader, decision.reason)
        order = Order(self._next_order_id, campaign_id, side, trader, quantity, limit_price,
                      self.ledger.now, quantity)
        if side is Side.SELL:
            self.tokens.reserve(campaign_id, trader, quantity)
        else:
            self.ledger.reserve(trader, notional)
        self._next_order_id += 1
        self.orders[order.order_id] = order
        self.ledger.record("ORDER", {"order_id": order.order_id, "campaign": campaign_id, "side": side.value,
                                     "trader": trader, "quantity": quantity, "limit_price": limit_price,
                                     "notional": notional})

        book = self.books.setdefault(campaign_id, OrderBook())
        opposite = Side.SELL if side is Side.BUY else Side.BUY
        trades = []
        while order.quantity:
            resting = book.best(opposite)
            if resting is None or not crosses(order, resting):
                break
            trades.append(self._fill(book, order, resting))
        if order.quantity:
            book.add(order)
        return trades, order

    def _fill(self, book: OrderBook, incoming: Order, resting: Order) -> Trade:
        buy, sell = (incoming, resting) if incoming.side is Side.BUY else (resting, incoming)
        qty = min(incoming.quantity, resting.quantity)
        price = resting.limit_price
        value = trade_value(qty, price)
        campaign_id = incoming.campaign_id

        held_before = buy.reservation()
        buy.quantity -= qty
        sell.quantity -= qty
        for o in (buy, sell):
            o.status = OrderStatus.FILLED if o.quantity == 0 else OrderStatus.PARTIALLY_FILLED
        self.ledger.release(buy.trader, held_before)
        self.tokens.release(campaign_id, sell.trader, qty)
        if buy.trader != sell.trader:
            if value:
                self.ledger.apply_transfer(buy.trader, sell.trader, value)
            self.tokens.move(campaign_id, sell.trader, buy.trader, qty)
        self.ledger.reserve(buy.trader, buy.reservation())
        if not resting.quantity:
            book.pop_best(resting.side)

        trade = Trade(len(self.trades) + 1, campaign_id, buy.order_id, sell.order_id, buy.trader,
                      sell.trader, qty, price, value, self.ledger.now)
        self.trades.append(trade)
        self.ledger.record("TRADE", trade.to_dict())
        return trade

    def cancel_order(self, order_id: int, trader: str) -> Order:
        order = self.orders.get(order_id)
        if order is None:
            raise UnknownOrder(repr(order_id))
        if order.trader != trader:
            raise NotOwner(f"order {order_id} belongs to another trader")
        if not order.is_open:
            raise AlreadyClosed(f"order {order_id} is {order.status.value}")
        held = order.reservation()
        if order.side is Side.BUY:
            self.ledger.release(trader, held)
        else:
            self.tokens.release(order.campaign_id, trader, held)
        self.books[order.campaign_id].remove(order)
        order.status = OrderStatus.CANCELLED
        self.ledger.record("CANCEL", {"order_id": order_id, "trader": trader, "campaign": order.campaign_id,
                                      "remaining": order.quantity, "released": held})
        return order

    def book_snapshot(self, campaign_id: str) -> BookSnapshot:
        book = self.books.get(campaign_id)
        return book.snapshot() if book else BookSnapshot([], [])

    def check_invariants(self) -> None:
        coin_holds: dict[str, int] = {}
        token_holds: dict[tuple[str, str], int] = {}
        for o in self.orders.values():
            if o.is_open and o.quantity <= 0:
                raise InvariantViolation(f"open order {o.order_id} with quantity {o.quantity}")
            if o.side is Side.BUY:
                coin_holds[o.trader] = coin_holds.get(o.trader, 0) + o.reservation()
            else:
                key = (o.campaign_id, o.trader)
                token_holds[key] = token_holds.get(key, 0) + o.reservation()
        for trader in set(coin_holds) | set(self.ledger.user_accounts):
            if self.ledger.reserved(trader) != coin_holds.get(trader, 0):
                raise InvariantViolation(f"{trader}: coin reservation out of sync")
        for (cid, holder), units in token_holds.items():
            if self.tokens.reserved(cid, holder) != units:
                raise InvariantViolation(f"{holder}: token reservation out of sync on {cid}")
        for cid, book in self.books.items():
            bid, ask = book.best(Side.BUY), book.best(Side.SELL)
            if bid and ask and bid.limit_price >= ask.limit_price:
                raise InvariantViolation(f"{cid}: crossed book {bid.limit_price} >= {ask.limit_price}")

    def snapshot(self) -> dict:
        books = {}
        for cid in sorted(self.books):
            snap = self.book_snapshot(cid)
            books[cid] = {"bids": [list(level) for level in snap.bids],
                          "asks": [list(level) for level in snap.asks]}
        return {
            "books": books,
            "open_orders": [
                {"order_id": o.order_id, "campaign": o.campaign_id, "side": o.side.value, "trader": o.trader,
                 "quantity": o.quantity, "limit_price": o.limit_price, "status": o.status.value}
                for o in sorted(self.orders.values(), key=lambda o: o.order_id) if o.is_open
            ],
            "trade_count": len(self.trades),
        }
