"""Scenario files: parsing, execution, replay and randomized generation.

A scenario is a JSON document::

    {
      "name": "turkey_equity",
      "seed": 0,
      "fee_model": {"traditional_bps": 400, "framework_bps": 50},
      "fiat_rates": [{"currency": "TRY", "minor_units_fiat_per_coin": 3450}],
      "jurisdiction_rules": [{"jurisdiction": "TR", "max_unverified_contribution": 0, "allowed": true}],
      "commands": [{"at": 0, "action": "CreateAccount", "id": "ayse"}, ...]
    }

Amount fields (``amount``, ``goal``, ``price``, ``max_unverified_contribution``)
accept either an integer number of minor units or a decimal coin string such
as ``"12.5"``. See README.md for the per-action fields.

Commands that fail an operation's preconditions are *rejections*: they are
logged as ``REJECT`` events and leave state untouched. Only structural problems
(bad JSON, unknown actions, missing fields, undefined ids, time running
backwards) raise :class:`MalformedScenario`.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .amount import UNIT, FiatRate, check_bps, parse_amount
from .compliance import ComplianceReport, JurisdictionRule
from .engine import Engine
from .errors import EngineError, InvalidAmount, InvalidFee, InvariantViolation, MalformedScenario
from .eventlog import export_jsonl
from .fees import FRAMEWORK_BPS, TRADITIONAL_BPS, FeeComparisonReport, fee_comparison

log = logging.getLogger(__name__)

# field kinds: id (defines), acct / camp (must be defined earlier), amount, int, str,
# ints, accts; a trailing "?" marks the field optional
ACTIONS: dict[str, dict[str, str]] = {
    "CreateAccount": {"id": "str"},
    "Mint": {"to": "acct", "amount": "amount"},
    "SetKyc": {"account": "acct", "status": "str", "jurisdiction": "str?"},
    "CreateCampaign": {
        "id": "str", "owner": "acct", "goal": "amount", "deadline": "int", "milestones": "ints",
        "validators": "accts", "required_approvals": "int", "fee_bps": "int?", "token": "token?",
    },
    "Contribute": {"campaign": "camp", "contributor": "acct", "amount": "amount"},
    "Finalize": {"campaign": "camp"},
    "Refund": {"campaign": "camp", "contributor": "acct"},
    "ApproveMilestone": {"campaign": "camp", "milestone": "int", "validator": "acct"},
    "Disburse": {"campaign": "camp", "milestone": "int"},
    "DefineToken": {"campaign": "camp", "kind": "str", "total_supply": "int"},
    "PlaceOrder": {"campaign": "camp", "trader": "acct", "side": "str", "quantity": "int", "price": "amount"},
    "CancelOrder": {"order_id": "int", "trader": "acct"},
    "GenerateReport": {"from": "int", "to": "int"},
}


@dataclass(frozen=True)
class Command:
    at: int
    action: str
    args: dict[str, Any]


@dataclass
class Scenario:
    name: str
    seed: int = 0
    traditional_bps: int = TRADITIONAL_BPS
    framework_bps: int = FRAMEWORK_BPS
    fiat_rates: list[FiatRate] = field(default_factory=list)
    jurisdiction_rules: list[JurisdictionRule] = field(default_factory=list)
    commands: list[Command] = field(default_factory=list)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _field(where: str, kind: str, value, accounts: set, campaigns: set):
    def bad(msg):
        raise MalformedScenario(f"{where}: {msg}")

    if kind == "str":
        if not isinstance(value, str):
            bad("expected a string")
        return value
    if kind == "int":
        if not _is_int(value):
            bad("expected an integer")
        return value
    if kind == "amount":
        try:
            return parse_amount(value)
        except InvalidAmount as exc:
            bad(str(exc))
    if kind == "ints":
        if not isinstance(value, list) or not all(_is_int(v) for v in value):
            bad("expected a list of integers")
        return list(value)
    if kind == "acct":
        if not isinstance(value, str):
            bad("expected an account id")
        if value not in accounts:
            bad(f"account {value!r} is not created by an earlier command")
        return value
    if kind == "accts":
        if not isinstance(value, list):
            bad("expected a list of account ids")
        return [_field(where, "acct", v, accounts, campaigns) for v in value]
    if kind == "camp":
        if not isinstance(value, str):
            bad("expected a campaign id")
        if value not in campaigns:
            bad(f"campaign {value!r} is not created by an earlier command")
        return value
    if kind == "token":
        if not isinstance(value, dict) or set(value) != {"kind", "total_supply"}:
            bad("token must be {kind, total_supply}")
        return (_field(where, "str", value["kind"], accounts, campaigns),
                _field(where, "int", value["total_supply"], accounts, campaigns))
    raise AssertionError(kind)


def parse_scenario(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise MalformedScenario("scenario must be a JSON object")
    allowed = {"name", "seed", "fee_model", "fiat_rates", "jurisdiction_rules", "commands", "description"}
    if set(doc) - allowed:
        raise MalformedScenario(f"unknown top-level keys {sorted(set(doc) - allowed)}")
    name = doc.get("name", "unnamed")
    seed = doc.get("seed", 0)
    if not isinstance(name, str) or not _is_int(seed) or not 0 <= seed < 2**64:
        raise MalformedScenario("name must be a string and seed a u64")
    fee_model = doc.get("fee_model", {})
    try:
        traditional = check_bps(fee_model.get("traditional_bps", TRADITIONAL_BPS), "traditional_bps")
        framework = check_bps(fee_model.get("framework_bps", FRAMEWORK_BPS), "framework_bps")
    except (AttributeError, InvalidFee) as exc:
        raise MalformedScenario(f"fee_model: {exc}") from None
    try:
        rates = [FiatRate(r["currency"], r["minor_units_fiat_per_coin"]) for r in doc.get("fiat_rates", [])]
        rules = [JurisdictionRule(r["jurisdiction"], parse_amount(r.get("max_unverified_contribution", 0)),
                                  r.get("allowed", True)) for r in doc.get("jurisdiction_rules", [])]
    except (KeyError, TypeError, ValueError, EngineError) as exc:
        raise MalformedScenario(f"bad fiat rate or jurisdiction rule: {exc!r}") from None
    if any(not isinstance(r.allowed, bool) for r in rules):
        raise MalformedScenario("jurisdiction rule 'allowed' must be a boolean")

    raw_commands = doc.get("commands", [])
    if not isinstance(raw_commands, list):
        raise MalformedScenario("commands must be a list")
    accounts: set[str] = set()
    campaigns: set[str] = set()
    commands = []
    last_at = 0
    for i, raw in enumerate(raw_commands):
        where = f"command {i}"
        if not isinstance(raw, dict):
            raise MalformedScenario(f"{where}: expected an object")
        action = raw.get("action")
        if action not in ACTIONS:
            raise MalformedScenario(f"{where}: unknown action {action!r}")
        at = raw.get("at")
        if not _is_int(at) or at < 0:
            raise MalformedScenario(f"{where}: 'at' must be a non-negative integer")
        if at < last_at:
            raise MalformedScenario(f"{where}: timestamp {at} precedes {last_at}")
        last_at = at
        schema = ACTIONS[action]
        extra = set(raw) - set(schema) - {"at", "action"}
        if extra:
            raise MalformedScenario(f"{where}: unknown fields {sorted(extra)} for {action}")
        args = {}
        for key, kind in schema.items():
            optional = kind.endswith("?")
            kind = kind.rstrip("?")
            if key not in raw or (optional and raw[key] is None):
                if optional:
                    continue
                raise MalformedScenario(f"{where}: {action} requires {key!r}")
            args[key] = _field(f"{where}.{key}", kind, raw[key], accounts, campaigns)
        if action == "CreateAccount":
            accounts.add(args["id"])
        elif action == "CreateCampaign":
            campaigns.add(args["id"])
        commands.append(Command(at, action, args))
    return Scenario(name, seed, traditional, framework, rates, rules, commands)


def load_scenario(source: str | Path | dict) -> Scenario:
    if isinstance(source, dict):
        return parse_scenario(source)
    try:
        doc = json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedScenario(f"{source}: invalid JSON: {exc}") from None
    return parse_scenario(doc)


def bundled_scenarios() -> dict[str, Scenario]:
    """The scenarios shipped with the package, keyed by file stem."""
    root = resources.files("stablefund") / "scenarios"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out[entry.name[:-5]] = parse_scenario(json.loads(entry.read_text()))
    return out


@dataclass
class Outcome:
    index: int
    command: Command
    result: Any = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class RunResult:
    scenario: Scenario
    engine: Engine
    outcomes: list[Outcome]
    reports: list[ComplianceReport]
    fee_report: FeeComparisonReport

    @property
    def rejections(self) -> list[Outcome]:
        return [o for o in self.outcomes if not o.ok]

    @property
    def final_hash(self) -> str:
        return self.engine.log.head.hex()


def _dispatch(engine: Engine, scenario: Scenario, cmd: Command):
    a = cmd.args
    action = cmd.action
    if action == "CreateAccount":
        return engine.ledger.create_account(a["id"])
    if action == "Mint":
        return engine.ledger.mint(a["to"], a["amount"])
    if action == "SetKyc":
        return engine.compliance.set_kyc_status(a["account"], a["status"], a.get("jurisdiction")).status.value
    if action == "CreateCampaign":
        return engine.campaigns.create_campaign(
            a["id"], a["owner"], a["goal"], a["deadline"], a["milestones"], a["validators"],
            a["required_approvals"], a.get("fee_bps", scenario.framework_bps), a.get("token"))
    if action == "Contribute":
        return engine.campaigns.contribute(a["campaign"], a["contributor"], a["amount"])
    if action == "Finalize":
        return engine.campaigns.finalize(a["campaign"]).value
    if action == "Refund":
        return engine.campaigns.refund(a["campaign"], a["contributor"])
    if action == "ApproveMilestone":
        return engine.campaigns.approve_milestone(a["campaign"], a["milestone"], a["validator"])
    if action == "Disburse":
        return engine.campaigns.disburse_milestone(a["campaign"], a["milestone"])
    if action == "DefineToken":
        return engine.campaigns.define_token(a["campaign"], a["kind"], a["total_supply"]).kind.value
    if action == "PlaceOrder":
        trades, order = engine.market.place_order(a["campaign"], a["trader"], a["side"], a["quantity"],
                                                  a["price"])
        return {"order_id": order.order_id, "trades": [t.trade_id for t in trades]}
    if action == "CancelOrder":
        return engine.market.cancel_order(a["order_id"], a["trader"]).order_id
    if action == "GenerateReport":
        return engine.compliance.generate_report(a["from"], a["to"])
    raise AssertionError(action)


def run_scenario(scenario: Scenario | str | Path | dict, verify: bool = False) -> RunResult:
    """Execute every command in order on a fresh engine.

    In verify mode the invariant suite runs after every event, rejected commands
    are checked to leave the state snapshot unchanged, and the chain is verified
    at the end; any failure raises :class:`InvariantViolation`.
    """
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    engine = Engine(verify=verify, fiat_rates=scenario.fiat_rates)
    for rule in scenario.jurisdiction_rules:
        engine.compliance.set_rule(rule)
    outcomes = []
    reports = []
    for index, cmd in enumerate(scenario.commands):
        engine.advance_to(cmd.at)
        before = engine.state_hash() if verify else None
        try:
            result = _dispatch(engine, scenario, cmd)
        except EngineError as exc:
            if verify and engine.state_hash() != before:
                raise InvariantViolation(f"rejected command {index} ({cmd.action}) changed state")
            engine.ledger.record("REJECT", {"index": index, "action": cmd.action, "error": exc.code})
            log.debug("command %d %s rejected: %s", index, cmd.action, exc)
            outcomes.append(Outcome(index, cmd, error=exc.code))
            continue
        if isinstance(result, ComplianceReport):
            reports.append(result)
        outcomes.append(Outcome(index, cmd, result))

    if verify:
        verdict = engine.verify_chain()
        if not verdict:
            raise InvariantViolation(f"chain verification failed: {verdict}")
        engine.check_invariants()
    gross = sum(c.gross_contributed for c in engine.campaigns)
    fee_report = fee_comparison(gross, scenario.traditional_bps, scenario.framework_bps)
    return RunResult(scenario, engine, outcomes, reports, fee_report)


def write_outputs(result: RunResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    engine = result.engine
    (out / "events.jsonl").write_text(engine.log.to_jsonl())
    (out / "snapshot.json").write_text(engine.snapshot_json())
    rows = ["campaign,account,units\n"]
    for cid in sorted(engine.tokens.cap_tables):
        for line in engine.tokens.cap_tables[cid].to_csv().splitlines()[1:]:
            rows.append(f"{cid},{line}\n")
    (out / "captable.csv").write_text("".join(rows))
    (out / "trades.jsonl").write_text(
        "".join(json.dumps(t.to_dict(), separators=(",", ":")) + "\n" for t in engine.market.trades))
    (out / "fee_report.json").write_text(json.dumps(result.fee_report.to_dict(), indent=2) + "\n")
    for n, report in enumerate(result.reports):
        (out / f"compliance_report_{n}.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return out


@dataclass(frozen=True)
class ReplayVerdict:
    match: bool
    first_hash: str
    second_hash: str

    def __bool__(self) -> bool:
        return self.match


def replay_verify(scenario: Scenario | str | Path | dict) -> ReplayVerdict:
    """Run the scenario twice and compare exported logs byte for byte."""
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    first = run_scenario(scenario)
    second = run_scenario(scenario)
    same = first.engine.log.to_jsonl() == second.engine.log.to_jsonl()
    return ReplayVerdict(same and first.final_hash == second.final_hash, first.final_hash, second.final_hash)


def events_jsonl(result: RunResult) -> str:
    return export_jsonl(result.engine.log)


def random_scenario(seed: int, n_accounts: int = 8, n_campaigns: int = 3, n_commands: int = 150) -> dict:
    """Generate a scenario document exercising every action; a fair share are rejected.

    The seed feeds only this generator; the engine itself never sees randomness.
    """
    rng = random.Random(seed)
    accounts = [f"acct{i:02d}" for i in range(n_accounts)]
    jurisdictions = ["TR", "DE", "US", "KP"]
    rules = [
        {"jurisdiction": "TR", "max_unverified_contribution": rng.choice([0, 5 * UNIT, 50 * UNIT])},
        {"jurisdiction": "US", "max_unverified_contribution": 100 * UNIT},
        {"jurisdiction": "KP", "max_unverified_contribution": 0, "allowed": False},
    ]
    cmds = []
    t = 0

    def emit(action, **kw):
        cmds.append({"at": t, "action": action, **kw})

    verified = []
    for a in accounts:
        emit("CreateAccount", id=a)
        emit("Mint", to=a, amount=rng.randint(50, 1500) * UNIT + rng.randint(0, UNIT - 1))
    for a in accounts:
        roll = rng.random()
        juris = rng.choice(jurisdictions)
        if roll < 0.6:
            emit("SetKyc", account=a, status="Verified", jurisdiction=juris)
            verified.append(a)
        elif roll < 0.7:
            emit("SetKyc", account=a, status="Barred", jurisdiction=juris)
        elif roll < 0.8:
            emit("SetKyc", account=a, status="Verified", jurisdiction=juris)
            emit("SetKyc", account=a, status="Barred")
        elif roll < 0.9:
            emit("SetKyc", account=a, status="Unverified", jurisdiction=juris)
    owners_pool = verified or accounts

    campaigns = {}
    steps = iter(range(n_commands))
    create_at = sorted(rng.sample(range(n_commands // 2), n_campaigns))
    for step in steps:
        t += rng.choice([0, 0, 1, 1, 2, 3])
        if create_at and step == create_at[0]:
            create_at.pop(0)
            cid = f"camp{len(campaigns)}"
            k = rng.randint(1, 4)
            cuts = sorted(rng.sample(range(1, 10_000), k - 1))
            validators = rng.sample(accounts, rng.randint(1, 4))
            campaigns[cid] = (k, validators)
            owner = rng.choice(owners_pool) if rng.random() < 0.85 else rng.choice(accounts)
            emit("CreateCampaign", id=cid, owner=owner, goal=rng.randint(20, 1200) * UNIT,
                 deadline=t + rng.randint(10, 60),
                 milestones=[b - a for a, b in zip([0] + cuts, cuts + [10_000])],
                 validators=validators, required_approvals=rng.randint(1, len(validators)),
                 fee_bps=rng.choice([0, 50, 100, 400]),
                 token={"kind": rng.choice(["Equity", "Reward", "Hybrid"]),
                        "total_supply": rng.choice([1, 7, 100, 10**6, 10**9])})
            continue
        if not campaigns:
            emit("SetKyc", account=rng.choice(accounts), status="Verified",
                 jurisdiction=rng.choice(jurisdictions))
            continue
        cid = rng.choice(sorted(campaigns))
        k, validators = campaigns[cid]
        who = rng.choice(accounts)
        action = rng.choices(
            ["Contribute", "Finalize", "Refund", "ApproveMilestone", "Disburse", "PlaceOrder",
             "CancelOrder", "SetKyc", "GenerateReport", "DefineToken"],
            weights=[30, 6, 8, 14, 8, 20, 5, 3, 2, 1])[0]
        if action == "Contribute":
            emit(action, campaign=cid, contributor=who, amount=rng.randint(1, 300 * UNIT))
        elif action == "Finalize":
            emit(action, campaign=cid)
        elif action == "Refund":
            emit(action, campaign=cid, contributor=who)
        elif action == "ApproveMilestone":
            validator = rng.choice(validators) if rng.random() < 0.85 else who
            emit(action, campaign=cid, milestone=rng.randint(0, k), validator=validator)
        elif action == "Disburse":
            emit(action, campaign=cid, milestone=rng.randint(0, k))
        elif action == "PlaceOrder":
            emit(action, campaign=cid, trader=who, side=rng.choice(["Buy", "Sell"]),
                 quantity=rng.choice([rng.randint(1, 50), rng.randint(1, 300_000)]),
                 price=rng.randint(1, 20) * UNIT // 4 + rng.choice([0, 0, 1, 333]))
        elif action == "CancelOrder":
            emit(action, order_id=rng.randint(1, 25), trader=who)
        elif action == "SetKyc":
            emit(action, account=who, status=rng.choice(["Verified", "Barred", "Unverified"]),
                 jurisdiction=rng.choice(jurisdictions))
        elif action == "GenerateReport":
            lo = rng.randint(0, t)
            emit(action, **{"from": lo, "to": rng.randint(lo, t + 5)})
        else:
            emit(action, campaign=cid, kind="Equity", total_supply=1000)
    return {"name": f"random-{seed}", "seed": seed, "jurisdiction_rules": rules, "commands": cmds}
