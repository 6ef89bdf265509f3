"""Fee comparison between an intermediated platform and the on-chain framework."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .amount import BPS_DENOMINATOR, check_amount, check_bps, fee_for

# Defaults only: 4% sits mid-range of the usual 3-5% platform cut, 0.5% under 1%.
TRADITIONAL_BPS = 400
FRAMEWORK_BPS = 50


@dataclass(frozen=True)
class FeeComparisonReport:
    gross_raised: int
    traditional_bps: int
    framework_bps: int
    traditional_fee: int
    framework_fee: int
    traditional_net: int
    framework_net: int
    savings_bps: int

    def to_dict(self) -> dict:
        return asdict(self)


def fee_comparison(gross: int, traditional_bps: int = TRADITIONAL_BPS,
                   framework_bps: int = FRAMEWORK_BPS) -> FeeComparisonReport:
    check_amount(gross, "gross")
    check_bps(traditional_bps, "traditional_bps")
    check_bps(framework_bps, "framework_bps")
    traditional_fee = fee_for(gross, traditional_bps)
    framework_fee = fee_for(gross, framework_bps)
    savings = (traditional_fee - framework_fee) * BPS_DENOMINATOR // gross if gross else 0
    return FeeComparisonReport(
        gross_raised=gross,
        traditional_bps=traditional_bps,
        framework_bps=framework_bps,
        traditional_fee=traditional_fee,
        framework_fee=framework_fee,
        traditional_net=gross - traditional_fee,
        framework_net=gross - framework_fee,
        savings_bps=savings,
    )
