# %% [markdown]
# # Scenario runs and fee comparison
#
# The bundled Turkish equity scenario raises 60,000 coins, pays out in two
# milestones and reports the owner's balance in lira.

# %%
import tempfile
from pathlib import Path

from stablefund import UNIT, bundled_scenarios, fee_comparison, replay_verify, run_scenario
from stablefund.scenario import write_outputs

scenario = bundled_scenarios()["turkey_equity"]
result = run_scenario(scenario, verify=True)
print("final hash", result.final_hash)
print("TRY", result.engine.snapshot()["fiat"]["TRY"]["balances"])
print(replay_verify(scenario))

out = write_outputs(result, Path(tempfile.mkdtemp()))
print(sorted(p.name for p in out.iterdir()))

# %% [markdown]
# Platform fees at 3 to 5 percent against a 0.5 percent framework fee.

# %%
for bps in (300, 400, 500):
    r = fee_comparison(100_000 * UNIT, bps, 50)
    print(bps, r.traditional_fee // UNIT, r.framework_fee // UNIT, r.savings_bps)
