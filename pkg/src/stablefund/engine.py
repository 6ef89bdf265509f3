"""The engine: one ledger, one log, and every module wired through them."""

from __future__ import annotations

import hashlib
import json

from .amount import FiatRate, convert_to_fiat
from .campaign import Campaigns
from .compliance import Compliance
from .errors import InvariantViolation
from .eventlog import EventRecord, verify_chain
from .ledger import FEE_SINK, Ledger
from .market import Market
from .tokenization import Tokens


class Engine:
    """Single-writer crowdfunding engine.

    With ``verify=True`` the full invariant suite runs after every appended
    event and raises :class:`InvariantViolation` on the first failure.
    """

    def __init__(self, verify: bool = False, fiat_rates: list[FiatRate] | tuple = ()):
        self.ledger = Ledger()
        self.compliance = Compliance(self.ledger)
        self.tokens = Tokens(self.ledger)
        self.campaigns = Campaigns(self.ledger, self.compliance, self.tokens, FEE_SINK)
        self.market = Market(self.ledger, self.compliance, self.tokens, self.campaigns)
        self.fiat_rates = list(fiat_rates)
        self.events_checked = 0
        if verify:
            self.ledger.log.subscribe(self._on_event)

    @property
    def log(self):
        return self.ledger.log

    @property
    def now(self) -> int:
        return self.ledger.now

    def advance_to(self, timestamp: int) -> None:
        self.ledger.advance_to(timestamp)

    def _on_event(self, record: EventRecord) -> None:
        self.check_invariants()
        self.events_checked += 1

    def check_invariants(self) -> None:
        self.ledger.check_conservation()
        self.campaigns.check_invariants()
        for cid, table in self.tokens.cap_tables.items():
            supply = self.tokens.classes[cid].total_supply
            if sum(table.holdings.values()) != supply:
                raise InvariantViolation(f"{cid}: holdings sum to {sum(table.holdings.values())}, supply {supply}")
            if any(units < 0 for units in table.holdings.values()):
                raise InvariantViolation(f"{cid}: negative holding")
        self.market.check_invariants()

    def verify_chain(self):
        return verify_chain(self.log.records)

    def snapshot(self) -> dict:
        snap = {"now": self.now}
        snap.update(self.ledger.snapshot())
        snap.update(self.compliance.snapshot())
        snap["campaigns"] = self.campaigns.snapshot()
        snap["tokens"] = self.tokens.snapshot()
        snap["market"] = self.market.snapshot()
        snap["fiat"] = {
            rate.currency_code: {
                "minor_units_fiat_per_coin": rate.minor_units_fiat_per_coin,
                "balances": {a: convert_to_fiat(self.ledger.balance(a), rate) for a in self.ledger.user_accounts},
            }
            for rate in self.fiat_rates
        }
        return snap

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, indent=2) + "\n"

    def state_hash(self) -> str:
        """Digest of the state snapshot, excluding the log."""
        return hashlib.sha256(json.dumps(self.snapshot(), sort_keys=True).encode()).hexdigest()
