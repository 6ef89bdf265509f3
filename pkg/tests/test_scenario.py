import copy
import json

import pytest

from stablefund import UNIT, bundled_scenarios, fee_comparison, replay_verify, run_scenario
from stablefund.errors import InvalidFee, MalformedScenario
from stablefund.eventlog import check_log
from stablefund.scenario import parse_scenario, random_scenario, write_outputs


def test_empty_scenario():
    result = run_scenario({"name": "empty", "commands": []}, verify=True)
    assert [r.kind for r in result.engine.log] == ["GENESIS"]
    assert result.engine.snapshot()["accounts"] == {}


def test_turkey_equity_trace():
    result = run_scenario(bundled_scenarios()["turkey_equity"], verify=True)
    assert result.rejections == []
    e = result.engine
    c = e.campaigns.get("istanbul-cafe")
    # 60,000 coins gross at 50 bps: fee 300 coins, 59,700 net, split 50/50
    assert (c.gross_contributed, c.fees_paid, c.total_raised) == (60_000 * UNIT, 300 * UNIT, 59_700 * UNIT)
    assert [m.released for m in c.milestones] == [29_850 * UNIT, 29_850 * UNIT]
    assert c.state.value == "Completed"
    assert e.ledger.balance(c.escrow) == 0
    assert e.ledger.balance("ayse") == 59_700 * UNIT
    assert e.tokens.cap_table("istanbul-cafe").holdings == {"mehmet": 1_000_000}
    # 59,700 coins at 34.50 TRY = 2,059,650.00 TRY
    assert e.snapshot()["fiat"]["TRY"]["balances"]["ayse"] == 205_965_000
    kinds = [r.kind for r in e.log]
    assert kinds.count("FINALIZE") == 1 and kinds.count("DISBURSE") == 2


def test_failed_refund_outcomes():
    result = run_scenario(bundled_scenarios()["failed_refund"], verify=True)
    errors = {o.index: o.error for o in result.rejections}
    assert errors == {15: "FundingStillActive", 16: "TooEarly", 17: "DeadlinePassed", 18: "CampaignNotFailed",
                      21: "NothingToRefund", 22: "NotFunded", 23: "NotFunded", 25: "AlreadyFinalized"}
    refunds = [o.result for o in result.outcomes if o.command.action == "Refund" and o.ok]
    assert refunds == [497_500_000, 995_000]
    assert result.engine.ledger.balance("@escrow:solar") == 0


def test_rejections_are_logged_and_leave_state():
    doc = {"commands": [
        {"at": 0, "action": "CreateAccount", "id": "a"},
        {"at": 0, "action": "CreateAccount", "id": "a"},
        {"at": 1, "action": "Mint", "to": "a", "amount": 0},
    ]}
    result = run_scenario(doc, verify=True)
    assert [o.error for o in result.outcomes] == [None, "DuplicateAccount", "ZeroAmount"]
    rejects = [r.payload for r in result.engine.log if r.kind == "REJECT"]
    assert rejects == [{"action": "CreateAccount", "error": "DuplicateAccount", "index": 1},
                       {"action": "Mint", "error": "ZeroAmount", "index": 2}]


@pytest.mark.parametrize("doc", [
    [],
    {"commands": [{"at": 0, "action": "Mint", "to": "ghost", "amount": 1}]},
    {"commands": [{"at": 0, "action": "Finalize", "campaign": "nope"}]},
    {"commands": [{"at": 0, "action": "Teleport"}]},
    {"commands": [{"at": 5, "action": "CreateAccount", "id": "a"}, {"at": 4, "action": "CreateAccount", "id": "b"}]},
    {"commands": [{"at": 0, "action": "CreateAccount"}]},
    {"commands": [{"at": 0, "action": "CreateAccount", "id": "a", "extra": 1}]},
    {"commands": [{"at": 0, "action": "CreateAccount", "id": "a"},
                  {"at": 0, "action": "Mint", "to": "a", "amount": "1.0000001"}]},
    {"fee_model": {"traditional_bps": 20_000}},
    {"bogus": 1},
])
def test_malformed(doc):
    with pytest.raises(MalformedScenario):
        parse_scenario(doc)


def test_replay_match_and_sensitivity():
    doc = json.loads(json.dumps(random_scenario(3)))
    assert replay_verify(doc).match
    mint = next(c for c in doc["commands"] if c["action"] == "Mint")
    changed = copy.deepcopy(doc)
    next(c for c in changed["commands"] if c["action"] == "Mint")["amount"] = mint["amount"] + 1
    assert run_scenario(doc).final_hash != run_scenario(changed).final_hash


def test_seed_does_not_reach_engine():
    sc = bundled_scenarios()["turkey_equity"]
    other = copy.deepcopy(sc)
    other.seed = 987654321
    assert run_scenario(sc).final_hash == run_scenario(other).final_hash


def test_fee_comparison_examples():
    gross = 100_000 * UNIT
    r = fee_comparison(gross, 400, 50)
    assert (r.traditional_fee, r.framework_fee) == (4_000 * UNIT, 500 * UNIT)
    assert r.framework_fee * 100 < gross
    assert r.savings_bps == 350
    zero = fee_comparison(gross, 0, 0)
    assert zero.traditional_fee == zero.framework_fee == zero.savings_bps == 0
    # (5,000 - 3,000) coins / 100,000 coins = 200 bps
    assert fee_comparison(gross, 500, 300).savings_bps == 200
    assert fee_comparison(0).savings_bps == 0
    with pytest.raises(InvalidFee):
        fee_comparison(gross, -1, 0)


def test_write_outputs(tmp_path):
    result = run_scenario(bundled_scenarios()["secondary_market"])
    out = write_outputs(result, tmp_path)
    names = sorted(p.name for p in out.iterdir())
    assert names == ["captable.csv", "compliance_report_0.json", "events.jsonl", "fee_report.json",
                     "snapshot.json", "trades.jsonl"]
    assert check_log((out / "events.jsonl").read_text()).ok
    assert (out / "captable.csv").read_text().splitlines()[0] == "campaign,account,units"
    trades = [json.loads(line) for line in (out / "trades.jsonl").read_text().splitlines()]
    assert [t["quantity"] for t in trades] == [20_000, 50_000, 10_000]
    report = json.loads((out / "compliance_report_0.json").read_text())
    assert list(report) == ["generated_at", "window", "entries"]
    fee = json.loads((out / "fee_report.json").read_text())
    assert fee["gross_raised"] == 605 * UNIT
