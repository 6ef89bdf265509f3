import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fee_oracle, fiat_oracle
from stablefund import UNIT, Engine, FiatRate, convert_to_fiat, fee_for, format_amount, parse_amount
from stablefund.errors import (
    DuplicateAccount,
    InsufficientFunds,
    InvalidAmount,
    InvalidFee,
    InvalidId,
    Overflow,
    SelfTransfer,
    UnknownAccount,
    ZeroAmount,
)
from stablefund.ledger import FEE_SINK, Ledger


@pytest.fixture
def ledger():
    return Ledger()


def test_fresh_account_has_zero_balance(ledger):
    ledger.create_account("alice")
    assert ledger.balance("alice") == 0
    assert ledger.log[-1].kind == "CREATE"


def test_duplicate_and_invalid_ids(ledger):
    ledger.create_account("alice")
    with pytest.raises(DuplicateAccount):
        ledger.create_account("alice")
    with pytest.raises(InvalidId):
        ledger.create_account("")
    with pytest.raises(InvalidId):
        ledger.create_account("@fees")


def test_mint(ledger):
    ledger.create_account("alice")
    assert ledger.mint("alice", 1_000_000) == 1_000_000
    ledger.create_account("bob")
    ledger.mint("bob", 500_000)
    assert ledger.mint("bob", 500_000) == 1_000_000
    assert ledger.total_minted == 2_000_000
    with pytest.raises(UnknownAccount):
        ledger.mint("ghost", 1)
    with pytest.raises(ZeroAmount):
        ledger.mint("alice", 0)
    with pytest.raises(InvalidAmount):
        ledger.mint("alice", -5)


def test_mint_overflow_rejected(ledger):
    ledger.create_account("a")
    ledger.mint("a", 2**63 - 2)
    with pytest.raises(Overflow):
        ledger.mint("a", 2)
    assert ledger.balance("a") == 2**63 - 2


@pytest.fixture
def funded(ledger):
    for name in ("alice", "bob"):
        ledger.create_account(name)
    ledger.mint("alice", 200_000 * UNIT)
    return ledger


def test_transfer_zero_fee(funded):
    assert funded.transfer("alice", "bob", 1_000_000, 0) == (1_000_000, 0)


def test_transfer_traditional_fee(funded):
    # 100,000 coins at 4%, the middle of the 3-5% band
    net, fee = funded.transfer("alice", "bob", 100_000_000_000, 400)
    assert fee == 4_000_000_000
    assert net == 96_000_000_000
    assert funded.balance(FEE_SINK) == 4_000_000_000


def test_transfer_floors_fee(funded):
    assert fee_oracle(999, 50) == 4
    assert funded.transfer("alice", "bob", 999, 50) == (995, 4)


def test_transfer_errors_leave_state(funded):
    with pytest.raises(InsufficientFunds):
        funded.transfer("bob", "alice", 1)
    with pytest.raises(SelfTransfer):
        funded.transfer("alice", "alice", 1)
    with pytest.raises(InvalidFee):
        funded.transfer("alice", "bob", 1, 10_001)
    with pytest.raises(UnknownAccount):
        funded.transfer("alice", "ghost", 1)
    assert funded.balance("alice") == 200_000 * UNIT
    assert funded.balance("bob") == 0


def test_reserved_funds_cannot_be_spent(funded):
    funded.reserve("alice", 200_000 * UNIT - 10)
    with pytest.raises(InsufficientFunds):
        funded.transfer("alice", "bob", 11)
    funded.transfer("alice", "bob", 10)
    funded.release("alice", 200_000 * UNIT - 10)
    assert funded.available("alice") == funded.balance("alice")


@pytest.mark.parametrize("amount, rate, expected", [
    (1_000_000, 100, 100),
    (0, 3450, 0),
    (1_234_567, 3450, 4259),
])
def test_convert_to_fiat(amount, rate, expected):
    assert fiat_oracle(amount, rate) == expected
    assert convert_to_fiat(amount, FiatRate("TRY", rate)) == expected


def test_fiat_rate_validation():
    with pytest.raises(ValueError):
        FiatRate("TRY", 0)
    with pytest.raises(ValueError):
        FiatRate("TRYX", 10)


@pytest.mark.parametrize("text, minor", [
    ("1", 1_000_000), ("0.000001", 1), ("12.5", 12_500_000), ("100_000", 100_000 * UNIT), (42, 42),
])
def test_parse_amount(text, minor):
    assert parse_amount(text) == minor


@pytest.mark.parametrize("bad", ["0.0000001", "-1", "abc", "inf", 1.5, True])
def test_parse_amount_rejects(bad):
    with pytest.raises(InvalidAmount):
        parse_amount(bad)


def test_format_amount():
    assert format_amount(5_000_000) == "5.000000"
    assert format_amount(1) == "0.000001"


@given(gross=st.integers(1, 10**15), bps=st.integers(0, 10_000))
def test_fee_exactness(gross, bps):
    ledger = Ledger()
    ledger.create_account("a")
    ledger.create_account("b")
    ledger.mint("a", gross)
    net, fee = ledger.transfer("a", "b", gross, bps)
    assert net + fee == gross
    assert fee == fee_for(gross, bps) == fee_oracle(gross, bps)
    ledger.check_conservation()


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 5 * UNIT),
                          st.integers(0, 10_000)), max_size=40))
def test_conservation_under_random_transfers(ops):
    engine = Engine(verify=True)
    names = ["a", "b", "c", "d"]
    for n in names:
        engine.ledger.create_account(n)
        engine.ledger.mint(n, 3 * UNIT)
    for src, dst, amount, bps in ops:
        try:
            engine.ledger.transfer(names[src], names[dst], amount, bps)
        except (InsufficientFunds, SelfTransfer, ZeroAmount):
            pass
    assert engine.ledger.total_balances() == engine.ledger.total_minted == 12 * UNIT
