"""Stablecoin ledger: accounts, balances, fee-bearing transfers, the logical clock.

Every other module mutates balances and writes events through a single
:class:`Ledger`, which owns the :class:`~stablefund.eventlog.EventLog`.

User accounts are created explicitly and appear in snapshots. System accounts
(campaign escrows, the platform fee sink) have ids starting with ``@``; they are
created on first use without an event of their own and count towards
conservation like any other account.
"""

from __future__ import annotations

from .amount import MAX_SUPPLY, check_amount, check_bps, fee_for
from .errors import (
    ClockError,
    DuplicateAccount,
    InsufficientFunds,
    InvalidAmount,
    InvalidId,
    InvariantViolation,
    Overflow,
    SelfTransfer,
    UnknownAccount,
    ZeroAmount,
)
from .eventlog import EventLog, EventRecord

FEE_SINK = "@fees"
SYSTEM_PREFIX = "@"


def escrow_account(campaign_id: str) -> str:
    return f"{SYSTEM_PREFIX}escrow:{campaign_id}"


class Ledger:
    def __init__(self, log: EventLog | None = None):
        self.log = log if log is not None else EventLog()
        self.now = 0
        self.total_minted = 0
        self._balances: dict[str, int] = {}
        self._reserved: dict[str, int] = {}
        self._system: set[str] = set()
        self.log.append("GENESIS", {"decimals": 6}, self.now)

    # clock

    def advance_to(self, timestamp: int) -> None:
        if isinstance(timestamp, bool) or not isinstance(timestamp, int) or timestamp < self.now:
            raise ClockError(f"cannot move clock from {self.now} to {timestamp!r}")
        self.now = timestamp

    def record(self, kind: str, payload: dict) -> EventRecord:
        return self.log.append(kind, payload, self.now)

    # accounts

    def create_account(self, account_id: str) -> str:
        if not isinstance(account_id, str) or not account_id or account_id.startswith(SYSTEM_PREFIX):
            raise InvalidId(f"invalid account id {account_id!r}")
        if account_id in self._balances:
            raise DuplicateAccount(account_id)
        self._balances[account_id] = 0
        self.record("CREATE", {"account": account_id})
        return account_id

    def ensure_system_account(self, account_id: str) -> str:
        if not account_id.startswith(SYSTEM_PREFIX):
            raise InvalidId(account_id)
        if account_id not in self._balances:
            self._balances[account_id] = 0
            self._system.add(account_id)
        return account_id

    def exists(self, account_id: str) -> bool:
        return account_id in self._balances

    def require(self, account_id: str) -> None:
        if account_id not in self._balances:
            raise UnknownAccount(repr(account_id))

    def is_user_account(self, account_id: str) -> bool:
        return account_id in self._balances and account_id not in self._system

    @property
    def user_accounts(self) -> list[str]:
        return sorted(a for a in self._balances if a not in self._system)

    @property
    def system_accounts(self) -> list[str]:
        return sorted(self._system)

    def balance(self, account_id: str) -> int:
        self.require(account_id)
        return self._balances[account_id]

    def reserved(self, account_id: str) -> int:
        return self._reserved.get(account_id, 0)

    def available(self, account_id: str) -> int:
        return self.balance(account_id) - self.reserved(account_id)

    def total_balances(self) -> int:
        return sum(self._balances.values())

    # money movement

    def mint(self, to: str, amount: int) -> int:
        self.require(to)
        check_amount(amount)
        if amount == 0:
            raise ZeroAmount("mint amount must be positive")
        if self.total_minted + amount > MAX_SUPPLY:
            raise Overflow("mint would exceed maximum supply")
        self._balances[to] += amount
        self.total_minted += amount
        self.record("MINT", {"account": to, "amount": amount})
        return self._balances[to]

    def check_transfer(self, src: str, dst: str, amount: int, fee_bps: int = 0) -> None:
        """Raise exactly what :meth:`transfer` would raise, without mutating."""
        self.require(src)
        self.require(dst)
        check_amount(amount)
        check_bps(fee_bps)
        if src == dst:
            raise SelfTransfer(src)
        if amount == 0:
            raise ZeroAmount("transfer amount must be positive")
        if self.available(src) < amount:
            raise InsufficientFunds(f"{src} has {self.available(src)} available, needs {amount}")

    def apply_transfer(self, src: str, dst: str, amount: int, fee_bps: int = 0,
                       fee_sink: str = FEE_SINK) -> tuple[int, int]:
        """Move funds without writing an event; callers record their own."""
        self.check_transfer(src, dst, amount, fee_bps)
        fee = fee_for(amount, fee_bps)
        if fee:
            if fee_sink.startswith(SYSTEM_PREFIX):
                self.ensure_system_account(fee_sink)
            self.require(fee_sink)
        net = amount - fee
        self._balances[src] -= amount
        self._balances[dst] += net
        if fee:
            self._balances[fee_sink] += fee
        return net, fee

    def transfer(self, src: str, dst: str, amount: int, fee_bps: int = 0,
                 fee_sink: str = FEE_SINK) -> tuple[int, int]:
        """Send ``amount`` from ``src``; ``dst`` receives it net of the floored fee."""
        net, fee = self.apply_transfer(src, dst, amount, fee_bps, fee_sink)
        self.record("TRANSFER", {"from": src, "to": dst, "gross": amount, "net": net,
                                 "fee": fee, "fee_bps": fee_bps, "fee_sink": fee_sink})
        return net, fee

    def reserve(self, account_id: str, amount: int) -> None:
        check_amount(amount)
        if self.available(account_id) < amount:
            raise InsufficientFunds(f"{account_id} cannot reserve {amount}")
        self._reserved[account_id] = self.reserved(account_id) + amount

    def release(self, account_id: str, amount: int) -> None:
        held = self.reserved(account_id)
        if amount < 0 or amount > held:
            raise InvalidAmount(f"cannot release {amount} of {held} reserved for {account_id}")
        if held == amount:
            self._reserved.pop(account_id, None)
        else:
            self._reserved[account_id] = held - amount

    def check_conservation(self) -> None:
        total = self.total_balances()
        if total != self.total_minted:
            raise InvariantViolation(f"balances sum to {total}, minted {self.total_minted}")
        for acct, held in self._reserved.items():
            if held < 0 or held > self._balances[acct]:
                raise InvariantViolation(f"{acct} reserves {held} of {self._balances[acct]}")
        if any(b < 0 for b in self._balances.values()):
            raise InvariantViolation("negative balance")

    def snapshot(self) -> dict:
        return {
            "accounts": {a: {"balance": self._balances[a], "reserved": self.reserved(a)}
                         for a in self.user_accounts},
            "system_accounts": {a: self._balances[a] for a in self.system_accounts},
            "total_minted": self.total_minted,
        }
