# %% [markdown]
# # Token allocation and secondary trading
#
# A funded campaign splits its token supply by net contribution using the
# largest-remainder method, then holders trade on a price-time order book.

# %%
from stablefund import UNIT, Engine, largest_remainder

print(largest_remainder({"carol": 1, "alice": 1, "bob": 1}, 100))

e = Engine(verify=True)
for p in ("founder", "val", "ana", "ben", "can"):
    e.ledger.create_account(p)
    e.compliance.set_kyc_status(p, "Verified", "TR")
    e.ledger.mint(p, 2_000 * UNIT)

e.campaigns.create_campaign("bakery", "founder", 1_000 * UNIT, 10, [10_000], ["val"], 1,
                            fee_bps=0, token=("Equity", 1_000_000))
for p, amount in (("ana", 500), ("ben", 300), ("can", 201)):
    e.campaigns.contribute("bakery", p, amount * UNIT)
e.advance_to(10)
e.campaigns.finalize("bakery")
print(e.tokens.cap_table("bakery").to_csv())

# %% [markdown]
# Prices are coins per whole token (one million units). Trades execute at the
# resting order's price.

# %%
m = e.market
m.place_order("bakery", "ana", "Sell", 100_000, 2 * UNIT)
m.place_order("bakery", "ben", "Sell", 50_000, 1_900_000)
trades, order = m.place_order("bakery", "can", "Buy", 120_000, 2_100_000)
for t in trades:
    print(t.to_dict())
print("buy order:", order.status.value)
print(m.book_snapshot("bakery"))
