# %% [markdown]
# # KYC gating
#
# Jurisdiction rules decide when an unverified account may contribute.

# %%
from stablefund import UNIT, Engine, JurisdictionRule
from stablefund.errors import GateDenied

e = Engine()
e.compliance.set_rule(JurisdictionRule("TR", max_unverified_contribution=100 * UNIT))
e.compliance.set_rule(JurisdictionRule("KP", allowed=False))

for name, status, where in [("owner", "Verified", "TR"), ("deniz", "Unverified", "TR"),
                            ("kim", "Verified", "KP"), ("eve", "Barred", None)]:
    e.ledger.create_account(name)
    e.ledger.mint(name, 1_000 * UNIT)
    e.compliance.set_kyc_status(name, status, where)

e.campaigns.create_campaign("garden", "owner", 500 * UNIT, 50, [10_000], ["owner"], 1)

# %%
for who, amount in [("deniz", 80 * UNIT), ("deniz", 150 * UNIT), ("kim", UNIT), ("eve", UNIT)]:
    try:
        e.campaigns.contribute("garden", who, amount)
        print(who, amount // UNIT, "accepted")
    except GateDenied as err:
        print(who, amount // UNIT, "denied:", err.reason)

# %% [markdown]
# A report over a time window lists the gated events that went through.
# Denied attempts change no state, so they leave no record.

# %%
report = e.compliance.generate_report(0, e.now)
for entry in report.to_dict()["entries"]:
    print(entry)
