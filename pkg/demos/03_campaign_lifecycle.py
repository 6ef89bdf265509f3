# %% [markdown]
# # Escrow, refunds and milestone release
#
# Two campaigns side by side: one misses its goal and refunds, the other
# funds and pays out over three milestones under 2-of-3 validator approval.

# %%
from stablefund import UNIT, Engine, format_amount
from stablefund.errors import EngineError

e = Engine(verify=True)
people = ["maker", "v1", "v2", "v3", "ana", "ben"]
for p in people:
    e.ledger.create_account(p)
    e.compliance.set_kyc_status(p, "Verified", "TR")
for p in ("ana", "ben"):
    e.ledger.mint(p, 5_000 * UNIT)

validators = ["v1", "v2", "v3"]
e.campaigns.create_campaign("kiln", "maker", 10_000 * UNIT, 20, [10_000], validators, 2)
e.campaigns.create_campaign("loom", "maker", 3_000 * UNIT, 20, [2_000, 3_000, 5_000], validators, 2)

e.advance_to(5)
e.campaigns.contribute("kiln", "ana", 1_000 * UNIT)
e.campaigns.contribute("loom", "ben", 4_000 * UNIT)

# %% [markdown]
# Refunds are refused before the deadline, exactly like the contract's guard.

# %%
try:
    e.campaigns.refund("kiln", "ana")
except EngineError as err:
    print(err.code, "-", err)

e.advance_to(20)
print("kiln:", e.campaigns.finalize("kiln").value)
print("loom:", e.campaigns.finalize("loom").value)
print("ana refunded", format_amount(e.campaigns.refund("kiln", "ana")))

# %% [markdown]
# Each milestone needs two approvals and must go in order.

# %%
for i in range(3):
    e.advance_to(30 + i)
    e.campaigns.approve_milestone("loom", i, "v1")
    e.campaigns.approve_milestone("loom", i, "v3")
    paid = e.campaigns.disburse_milestone("loom", i)
    print(f"milestone {i}: released {format_amount(paid)}")

c = e.campaigns.get("loom")
print(c.state.value, "escrow left:", e.ledger.balance(c.escrow))
