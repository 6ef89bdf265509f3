# %% [markdown]
# # Ledger and hash-chained log
#
# Amounts are integers in micro-coins (6 decimals). Every state change is
# appended to a log where each record commits to the hash of the one before.

# %%
from stablefund import UNIT, Engine, check_log, format_amount

e = Engine(verify=True)
for name in ("alice", "bob"):
    e.ledger.create_account(name)
    e.compliance.set_kyc_status(name, "Verified", "TR")

e.ledger.mint("alice", 250 * UNIT)
e.advance_to(3)
e.ledger.transfer("alice", "bob", 40 * UNIT, fee_bps=50)

for name in ("alice", "bob", "@fees"):
    print(f"{name:>6}: {format_amount(e.ledger.balance(name))}")

# %% [markdown]
# A 50 bps fee on 40 coins is 0.2 coins and lands in the `@fees` system account.
# Every balance change above ran the invariant suite once per event.

# %%
print("events:", len(e.log), "checked:", e.events_checked)
for rec in e.log:
    print(rec.seq, rec.kind, rec.hash.hex()[:16])

# %% [markdown]
# Flip one byte in the export and the checker names the first bad record.

# %%
text = e.log.to_jsonl()
print(check_log(text))
tampered = text.replace('"gross":40000000', '"gross":40000001')
print(check_log(tampered))
