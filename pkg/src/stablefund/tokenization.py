"""Campaign tokens and proportional cap-table allocation.

Token units are indivisible integers. Allocation is largest-remainder
(Hamilton) apportionment of ``total_supply`` over net contributions: everyone
gets the floor of their exact quota and the leftover units go one each to the
largest fractional remainders, ties to the byte-smallest account id.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

from .errors import InsufficientTokens, InvalidAmount, NoAllocation, NoTokenClass, TokenClassExists
from .ledger import Ledger


class TokenKind(str, enum.Enum):
    EQUITY = "Equity"
    REWARD = "Reward"
    HYBRID = "Hybrid"


@dataclass(frozen=True)
class TokenClass:
    campaign_id: str
    kind: TokenKind
    total_supply: int


@dataclass
class CapTable:
    campaign_id: str
    holdings: dict[str, int] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["account", "units"])
        for account in sorted(self.holdings, key=str.encode):
            writer.writerow([account, self.holdings[account]])
        return buf.getvalue()


def largest_remainder(contributions: dict[str, int], total_supply: int) -> dict[str, int]:
    """Apportion ``total_supply`` proportionally to ``contributions``.

    Quotas ``supply * c / total`` share the denominator ``total``, so floors and
    remainders are compared exactly as integers.
    """
    total = sum(contributions.values())
    if total <= 0:
        raise InvalidAmount("cannot allocate over zero total contribution")
    shares = {}
    remainders = []
    for account, amount in contributions.items():
        whole, rem = divmod(total_supply * amount, total)
        shares[account] = whole
        remainders.append((-rem, account.encode("utf-8"), account))
    leftover = total_supply - sum(shares.values())
    for _, _, account in sorted(remainders)[:leftover]:
        shares[account] += 1
    return shares


class Tokens:
    def __init__(self, ledger: Ledger):
        self.ledger = ledger
        self.classes: dict[str, TokenClass] = {}
        self.cap_tables: dict[str, CapTable] = {}
        self._reserved: dict[tuple[str, str], int] = {}

    def check_define(self, campaign_id: str, kind, total_supply: int) -> TokenClass:
        if campaign_id in self.classes:
            raise TokenClassExists(campaign_id)
        try:
            kind = TokenKind(kind)
        except ValueError:
            raise InvalidAmount(f"unknown token kind {kind!r}") from None
        if isinstance(total_supply, bool) or not isinstance(total_supply, int) or total_supply <= 0:
            raise InvalidAmount(f"total_supply must be a positive integer, got {total_supply!r}")
        return TokenClass(campaign_id, kind, total_supply)

    def define(self, campaign_id: str, kind, total_supply: int) -> TokenClass:
        token = self.check_define(campaign_id, kind, total_supply)
        self.classes[campaign_id] = token
        self.ledger.record("DEFINE_TOKEN", {"campaign": campaign_id, "kind": token.kind.value,
                                            "total_supply": total_supply})
        return token

    def allocate(self, campaign_id: str, contributions: dict[str, int]) -> CapTable:
        """Write the cap table for a freshly funded campaign.

        Only called by the campaign state machine on its Active -> Funded edge.
        """
        token = self.classes.get(campaign_id)
        if token is None:
            raise NoTokenClass(campaign_id)
        holders = {a: c for a, c in contributions.items() if c > 0}
        table = CapTable(campaign_id, largest_remainder(holders, token.total_supply))
        self.cap_tables[campaign_id] = table
        self.ledger.record("ALLOCATE", {"campaign": campaign_id, "holdings": dict(table.holdings)})
        return table

    def cap_table(self, campaign_id: str) -> CapTable:
        table = self.cap_tables.get(campaign_id)
        if table is None:
            raise NoAllocation(campaign_id)
        return table

    def token_balance(self, campaign_id: str, holder: str) -> int:
        return self.cap_table(campaign_id).holdings.get(holder, 0)

    def reserved(self, campaign_id: str, holder: str) -> int:
        return self._reserved.get((campaign_id, holder), 0)

    def available(self, campaign_id: str, holder: str) -> int:
        return self.token_balance(campaign_id, holder) - self.reserved(campaign_id, holder)

    def reserve(self, campaign_id: str, holder: str, units: int) -> None:
        if self.available(campaign_id, holder) < units:
            raise InsufficientTokens(f"{holder} has {self.available(campaign_id, holder)} free units")
        self._reserved[(campaign_id, holder)] = self.reserved(campaign_id, holder) + units

    def release(self, campaign_id: str, holder: str, units: int) -> None:
        left = self.reserved(campaign_id, holder) - units
        if left < 0:
            raise InvalidAmount("releasing more tokens than reserved")
        if left:
            self._reserved[(campaign_id, holder)] = left
        else:
            self._reserved.pop((campaign_id, holder), None)

    def move(self, campaign_id: str, src: str, dst: str, units: int) -> None:
        holdings = self.cap_table(campaign_id).holdings
        if holdings.get(src, 0) < units:
            raise InsufficientTokens(src)
        holdings[src] -= units
        holdings[dst] = holdings.get(dst, 0) + units

    def snapshot(self) -> dict:
        return {
            cid: {
                "kind": token.kind.value,
                "total_supply": token.total_supply,
                "holdings": dict(sorted(self.cap_tables[cid].holdings.items()))
                if cid in self.cap_tables else None,
            }
            for cid, token in sorted(self.classes.items())
        }
