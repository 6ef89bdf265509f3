import pytest

from stablefund import UNIT, Engine


@pytest.fixture
def engine():
    return Engine(verify=True)


def verified(engine, *names, balance=0, jurisdiction="TR"):
    for name in names:
        engine.ledger.create_account(name)
        engine.compliance.set_kyc_status(name, "Verified", jurisdiction)
        if balance:
            engine.ledger.mint(name, balance)


@pytest.fixture
def campaign_engine(engine):
    """Engine with owner, backers alice/bob/carol (1,000 coins each) and validators v1..v3."""
    verified(engine, "owner")
    verified(engine, "alice", "bob", "carol", balance=1000 * UNIT)
    for v in ("v1", "v2", "v3"):
        engine.ledger.create_account(v)
    return engine


def open_campaign(engine, cid="c1", goal=1 * UNIT, deadline=100, milestones=(5000, 5000), m=2,
                  fee_bps=0, token=None):
    return engine.campaigns.create_campaign(cid, "owner", goal, deadline, list(milestones),
                                            ["v1", "v2", "v3"], m, fee_bps, token)


_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        _acceptance_results.append((marker.args[0], marker.args[1], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_acceptance_results):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number}. {title} ({duration:.2f}s)")
