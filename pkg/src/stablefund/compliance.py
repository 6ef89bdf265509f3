"""KYC/AML identity registry, participation gate and regulator reports."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .amount import check_amount
from .errors import IllegalTransition, InvalidJurisdiction, InvalidWindow
from .eventlog import EventRecord
from .ledger import Ledger


class KycStatus(str, enum.Enum):
    UNVERIFIED = "Unverified"
    VERIFIED = "Verified"
    BARRED = "Barred"


LEGAL_TRANSITIONS = {
    (KycStatus.UNVERIFIED, KycStatus.VERIFIED),
    (KycStatus.UNVERIFIED, KycStatus.BARRED),
    (KycStatus.VERIFIED, KycStatus.BARRED),
}

CREATE_CAMPAIGN = "CreateCampaign"
CONTRIBUTE = "Contribute"

# event kind -> (account key, amount key) for events that passed the gate
GATED_EVENTS = {
    "CREATE_CAMPAIGN": ("owner", "goal"),
    "CONTRIBUTE": ("contributor", "gross"),
    "ORDER": ("trader", "notional"),
}


def _check_jurisdiction(code: str | None) -> None:
    if code is None:
        return
    if not (isinstance(code, str) and len(code) == 2 and code.isascii() and code.isalpha()
            and code.isupper()):
        raise InvalidJurisdiction(f"jurisdiction must be a 2-letter upper-case code, got {code!r}")


@dataclass
class IdentityRecord:
    account: str
    status: KycStatus = KycStatus.UNVERIFIED
    jurisdiction: str | None = None
    verified_at: int | None = None


@dataclass(frozen=True)
class JurisdictionRule:
    """``max_unverified_contribution == 0`` means KYC is always required."""

    jurisdiction: str
    max_unverified_contribution: int = 0
    allowed: bool = True

    def __post_init__(self):
        if self.jurisdiction != DEFAULT_JURISDICTION:
            _check_jurisdiction(self.jurisdiction)
        check_amount(self.max_unverified_contribution, "max_unverified_contribution")


DEFAULT_JURISDICTION = "*"
DEFAULT_RULE = JurisdictionRule(DEFAULT_JURISDICTION, 0, True)


@dataclass(frozen=True)
class GateDecision:
    allowed: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.allowed


ALLOW = GateDecision(True)


def decide(record: IdentityRecord | None, rule: JurisdictionRule, action: str,
           amount: int = 0) -> GateDecision:
    """The gate as a pure function of identity, rule and requested action."""
    if action not in (CREATE_CAMPAIGN, CONTRIBUTE):
        raise ValueError(f"unknown gated action {action!r}")
    if record is None:
        return GateDecision(False, "UnknownAccount")
    if record.status is KycStatus.BARRED:
        return GateDecision(False, "Barred")
    if not rule.allowed:
        return GateDecision(False, "JurisdictionDisallowed")
    if record.status is KycStatus.UNVERIFIED:
        if action == CREATE_CAMPAIGN or amount > rule.max_unverified_contribution:
            return GateDecision(False, "KycRequired")
    return ALLOW


@dataclass(frozen=True)
class ReportEntry:
    seq: int
    account: str
    kind: str
    amount: int


@dataclass(frozen=True)
class ComplianceReport:
    generated_at: int
    window: tuple[int, int]
    entries: tuple[ReportEntry, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "generated_at": self.generated_at,
            "window": list(self.window),
            "entries": [
                {"seq": e.seq, "account": e.account, "kind": e.kind, "amount": e.amount}
                for e in self.entries
            ],
        }


def build_report(records, start: int, end: int, generated_at: int) -> ComplianceReport:
    """Report every gated event with ``start <= timestamp <= end``, in seq order."""
    if start > end:
        raise InvalidWindow(f"window start {start} is after end {end}")
    entries = []
    for rec in records:
        keys = GATED_EVENTS.get(rec.kind)
        if keys and start <= rec.timestamp <= end:
            entries.append(ReportEntry(rec.seq, rec.payload[keys[0]], rec.kind, rec.payload[keys[1]]))
    return ComplianceReport(generated_at, (start, end), tuple(entries))


class Compliance:
    def __init__(self, ledger: Ledger):
        self.ledger = ledger
        self._identities: dict[str, IdentityRecord] = {}
        self._rules: dict[str, JurisdictionRule] = {DEFAULT_JURISDICTION: DEFAULT_RULE}

    def set_rule(self, rule: JurisdictionRule) -> JurisdictionRule:
        self._rules[rule.jurisdiction] = rule
        self.ledger.record("RULE", {"jurisdiction": rule.jurisdiction,
                                    "max_unverified_contribution": rule.max_unverified_contribution,
                                    "allowed": rule.allowed})
        return rule

    def rule_for(self, jurisdiction: str | None) -> JurisdictionRule:
        return self._rules.get(jurisdiction, self._rules[DEFAULT_JURISDICTION])

    def identity(self, account: str) -> IdentityRecord:
        self.ledger.require(account)
        return self._identities.get(account) or IdentityRecord(account)

    def set_kyc_status(self, account: str, status: KycStatus | str,
                       jurisdiction: str | None = None) -> IdentityRecord:
        self.ledger.require(account)
        try:
            status = KycStatus(status)
        except ValueError:
            raise IllegalTransition(f"unknown status {status!r}") from None
        _check_jurisdiction(jurisdiction)
        current = self.identity(account)
        # Unverified -> Unverified only registers a jurisdiction
        registering = current.status is status is KycStatus.UNVERIFIED and jurisdiction is not None
        if (current.status, status) not in LEGAL_TRANSITIONS and not registering:
            raise IllegalTransition(f"{current.status.value} -> {status.value}")
        updated = IdentityRecord(
            account,
            status,
            jurisdiction if jurisdiction is not None else current.jurisdiction,
            self.ledger.now if status is KycStatus.VERIFIED else current.verified_at,
        )
        self._identities[account] = updated
        self.ledger.record("KYC", {"account": account, "status": status.value,
                                   "jurisdiction": updated.jurisdiction})
        return updated

    def check_gate(self, account: str, action: str, amount: int = 0) -> GateDecision:
        if not self.ledger.is_user_account(account):
            return decide(None, self._rules[DEFAULT_JURISDICTION], action, amount)
        record = self.identity(account)
        return decide(record, self.rule_for(record.jurisdiction), action, amount)

    def generate_report(self, start: int, end: int) -> ComplianceReport:
        report = build_report(self.ledger.log, start, end, self.ledger.now)
        self.ledger.record("REPORT", {"from": start, "to": end, "entries": len(report.entries)})
        return report

    def snapshot(self) -> dict:
        return {
            "identities": {
                a: {"status": r.status.value, "jurisdiction": r.jurisdiction, "verified_at": r.verified_at}
                for a, r in sorted(self._identities.items())
            },
            "rules": {
                j: {"max_unverified_contribution": r.max_unverified_contribution, "allowed": r.allowed}
                for j, r in sorted(self._rules.items())
            },
        }


def audit_gate(records: list[EventRecord]) -> list[int]:
    """Replay a log and return seqs of gated events the gate should have denied.

    Identity and rule state is rebuilt from KYC/RULE/CREATE events alone, so the
    audit needs nothing but the exported log.
    """
    accounts: set[str] = set()
    identities: dict[str, IdentityRecord] = {}
    rules = {DEFAULT_JURISDICTION: DEFAULT_RULE}
    violations = []
    for rec in records:
        p = rec.payload
        if rec.kind == "CREATE":
            accounts.add(p["account"])
        elif rec.kind == "RULE":
            rules[p["jurisdiction"]] = JurisdictionRule(p["jurisdiction"], p["max_unverified_contribution"],
                                                        p["allowed"])
        elif rec.kind == "KYC":
            identities[p["account"]] = IdentityRecord(p["account"], KycStatus(p["status"]), p["jurisdiction"])
        elif rec.kind in GATED_EVENTS:
            account_key, amount_key = GATED_EVENTS[rec.kind]
            account = p[account_key]
            record = identities.get(account, IdentityRecord(account)) if account in accounts else None
            rule = rules.get(record.jurisdiction if record else None, rules[DEFAULT_JURISDICTION])
            action = CREATE_CAMPAIGN if rec.kind == "CREATE_CAMPAIGN" else CONTRIBUTE
            if not decide(record, rule, action, p[amount_key]):
                violations.append(rec.seq)
    return violations
