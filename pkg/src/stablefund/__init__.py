"""Deterministic stablecoin crowdfunding engine.

Stablecoin ledger with a hash-chained event log, KYC/AML gating, campaign
escrow with milestone multisig disbursement and refunds, proportional token
allocation, and a secondary limit order book, all driven by scenario files.
"""

from .amount import UNIT, FiatRate, convert_to_fiat, fee_for, format_amount, parse_amount
from .campaign import Campaign, CampaignState, Milestone, MilestoneStatus
from .compliance import ComplianceReport, IdentityRecord, JurisdictionRule, KycStatus
from .engine import Engine
from .eventlog import EventRecord, check_log, verify_chain
from .fees import FeeComparisonReport, fee_comparison
from .market import Order, Side, Trade
from .scenario import Scenario, bundled_scenarios, load_scenario, replay_verify, run_scenario
from .tokenization import CapTable, TokenClass, TokenKind, largest_remainder

__version__ = "0.1.0"

__all__ = [
    "UNIT", "FiatRate", "convert_to_fiat", "fee_for", "format_amount", "parse_amount",
    "Campaign", "CampaignState", "Milestone", "MilestoneStatus",
    "ComplianceReport", "IdentityRecord", "JurisdictionRule", "KycStatus",
    "Engine", "EventRecord", "check_log", "verify_chain",
    "FeeComparisonReport", "fee_comparison",
    "Order", "Side", "Trade",
    "Scenario", "bundled_scenarios", "load_scenario", "replay_verify", "run_scenario",
    "CapTable", "TokenClass", "TokenKind", "largest_remainder",
]
