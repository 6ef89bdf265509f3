import pytest

from conftest import open_campaign
from stablefund import UNIT, Engine, EventRecord, JurisdictionRule, KycStatus
from stablefund.compliance import CONTRIBUTE, CREATE_CAMPAIGN, audit_gate, build_report
from stablefund.errors import GateDenied, IllegalTransition, InvalidWindow, UnknownAccount


@pytest.fixture
def comp(engine):
    for name in ("alice", "bob", "owner", "v1"):
        engine.ledger.create_account(name)
    return engine.compliance


def test_verify_sets_timestamp(engine, comp):
    engine.advance_to(7)
    rec = comp.set_kyc_status("alice", "Verified", "TR")
    assert rec.status is KycStatus.VERIFIED
    assert rec.verified_at == 7
    assert engine.log[-1].kind == "KYC"


@pytest.mark.parametrize("path", [
    ["Verified", "Unverified"],
    ["Barred", "Verified"],
    ["Barred", "Unverified"],
    ["Verified", "Verified"],
    ["Barred", "Barred"],
])
def test_illegal_transitions(comp, path):
    *ok, bad = path
    for status in ok:
        comp.set_kyc_status("alice", status, "DE")
    with pytest.raises(IllegalTransition):
        comp.set_kyc_status("alice", bad)


def test_unknown_account(comp):
    with pytest.raises(UnknownAccount):
        comp.set_kyc_status("ghost", "Verified")


def test_gate_decisions(comp):
    comp.set_rule(JurisdictionRule("US", 100 * UNIT))
    comp.set_rule(JurisdictionRule("KP", 0, allowed=False))
    comp.set_kyc_status("alice", "Verified", "TR")
    assert comp.check_gate("alice", CONTRIBUTE, 10**12)
    assert comp.check_gate("alice", CREATE_CAMPAIGN)

    comp.set_kyc_status("bob", "Barred")
    for action in (CONTRIBUTE, CREATE_CAMPAIGN):
        decision = comp.check_gate("bob", action, 1)
        assert not decision and decision.reason == "Barred"

    # default rule: KYC always required
    assert comp.check_gate("owner", CONTRIBUTE, 1).reason == "KycRequired"
    assert comp.check_gate("owner", CONTRIBUTE, 0)

    comp.set_kyc_status("owner", "Unverified", "US")
    assert comp.check_gate("owner", CONTRIBUTE, 100 * UNIT)
    assert comp.check_gate("owner", CONTRIBUTE, 100 * UNIT + 1).reason == "KycRequired"
    assert comp.check_gate("owner", CREATE_CAMPAIGN).reason == "KycRequired"

    comp.set_kyc_status("v1", "Verified", "KP")
    assert comp.check_gate("v1", CONTRIBUTE, 1).reason == "JurisdictionDisallowed"
    assert comp.check_gate("ghost", CONTRIBUTE, 1).reason == "UnknownAccount"


def test_gate_is_pure(engine, comp):
    n = len(engine.log)
    comp.check_gate("alice", CONTRIBUTE, 5)
    assert len(engine.log) == n


def test_report_windows(campaign_engine):
    e = campaign_engine
    assert e.compliance.generate_report(0, 0).entries == ()
    e.advance_to(1)
    open_campaign(e)
    for t, who in [(2, "alice"), (3, "bob"), (3, "carol")]:
        e.advance_to(t)
        e.campaigns.contribute("c1", who, UNIT)
    e.advance_to(10)
    report = e.compliance.generate_report(2, 3)
    expected = [(r.seq, r.payload["contributor"]) for r in e.log
                if r.kind == "CONTRIBUTE" and 2 <= r.timestamp <= 3]
    assert [(x.seq, x.account) for x in report.entries] == expected
    assert len(expected) == 3
    assert [x.kind for x in report.entries] == ["CONTRIBUTE"] * 3
    assert report.generated_at == 10
    # reproducible from the log alone
    assert build_report(e.log.records, 2, 3, 10) == report
    assert e.compliance.generate_report(2, 3) == report
    with pytest.raises(InvalidWindow):
        e.compliance.generate_report(4, 3)


def test_audit_detects_forged_contribution(campaign_engine):
    e = campaign_engine
    e.ledger.create_account("mallory")
    e.ledger.mint("mallory", UNIT)
    open_campaign(e)
    e.campaigns.contribute("c1", "alice", UNIT)
    with pytest.raises(GateDenied):
        e.campaigns.contribute("c1", "mallory", UNIT)
    assert audit_gate(e.log.records) == []
    records = list(e.log.records)
    forged = EventRecord(len(records), e.now, "CONTRIBUTE",
                         {"campaign": "c1", "contributor": "mallory", "gross": UNIT, "net": UNIT, "fee": 0},
                         records[-1].hash, bytes(32))
    assert audit_gate(records + [forged]) == [len(records)]


def test_snapshot_lists_identities(comp):
    comp.set_kyc_status("alice", "Verified", "TR")
    snap = comp.snapshot()
    assert snap["identities"]["alice"]["status"] == "Verified"
    assert "*" in snap["rules"]


def test_fresh_engine_default_rule():
    e = Engine()
    assert e.compliance.rule_for(None).max_unverified_contribution == 0
