"""Campaign escrow state machine.

    Active --finalize, raised >= goal--> Funded --last milestone disbursed--> Completed
    Active --finalize, raised <  goal--> Failed   (contributors may refund)

Contributions are held in a per-campaign escrow account. Funds leave escrow
only through refunds (Failed) or milestone disbursements (Funded), the latter
gated by M-of-N validator approvals and strictly in milestone order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .amount import BPS_DENOMINATOR, check_amount, check_bps, fee_for
from .compliance import CONTRIBUTE, CREATE_CAMPAIGN, Compliance
from .errors import (
    AlreadyDisbursed,
    AlreadyFinalized,
    BadMilestoneSchedule,
    CampaignNotActive,
    CampaignNotFailed,
    DeadlinePassed,
    DuplicateCampaign,
    FundingStillActive,
    GateDenied,
    InvalidId,
    InvariantViolation,
    NotApproved,
    NotFunded,
    NothingToRefund,
    NotValidator,
    OutOfOrder,
    PastDeadline,
    TooEarly,
    UnknownCampaign,
    UnknownMilestone,
    ZeroAmount,
)
from .ledger import FEE_SINK, Ledger, escrow_account
from .tokenization import Tokens


class CampaignState(str, enum.Enum):
    ACTIVE = "Active"
    FUNDED = "Funded"
    FAILED = "Failed"
    COMPLETED = "Completed"


class MilestoneStatus(str, enum.Enum):
    PENDING = "Pending"
    APPROVED = "Approved"
    DISBURSED = "Disbursed"


@dataclass
class Milestone:
    index: int
    release_bps: int
    validators: frozenset[str]
    required_approvals: int
    approvals: set[str] = field(default_factory=set)
    status: MilestoneStatus = MilestoneStatus.PENDING
    released: int = 0


@dataclass
class Campaign:
    id: str
    owner: str
    goal: int
    deadline: int
    fee_bps: int
    milestones: list[Milestone]
    state: CampaignState = CampaignState.ACTIVE
    contributions: dict[str, int] = field(default_factory=dict)
    total_raised: int = 0
    gross_contributed: int = 0
    fees_paid: int = 0
    disbursed: int = 0
    refunded: int = 0

    @property
    def escrow(self) -> str:
        return escrow_account(self.id)

    @property
    def next_milestone(self) -> int:
        """Index of the first milestone not yet disbursed."""
        for m in self.milestones:
            if m.status is not MilestoneStatus.DISBURSED:
                return m.index
        return len(self.milestones)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "owner": self.owner,
            "goal": self.goal,
            "deadline": self.deadline,
            "fee_bps": self.fee_bps,
            "state": self.state.value,
            "contributions": dict(sorted(self.contributions.items())),
            "total_raised": self.total_raised,
            "gross_contributed": self.gross_contributed,
            "fees_paid": self.fees_paid,
            "disbursed": self.disbursed,
            "refunded": self.refunded,
            "escrow_balance": self.total_raised - self.disbursed - self.refunded,
            "milestones": [
                {
                    "index": m.index,
                    "release_bps": m.release_bps,
                    "required_approvals": m.required_approvals,
                    "validators": sorted(m.validators),
                    "approvals": sorted(m.approvals),
                    "status": m.status.value,
                    "released": m.released,
                }
                for m in self.milestones
            ],
        }


class Campaigns:
    def __init__(self, ledger: Ledger, compliance: Compliance, tokens: Tokens, fee_sink: str = FEE_SINK):
        self.ledger = ledger
        self.compliance = compliance
        self.tokens = tokens
        self.fee_sink = fee_sink
        self._campaigns: dict[str, Campaign] = {}

    def __contains__(self, campaign_id: str) -> bool:
        return campaign_id in self._campaigns

    def __iter__(self):
        return iter(self._campaigns.values())

    def get(self, campaign_id: str) -> Campaign:
        try:
            return self._campaigns[campaign_id]
        except KeyError:
            raise UnknownCampaign(repr(campaign_id)) from None

    def create_campaign(self, campaign_id: str, owner: str, goal: int, deadline: int,
                        milestones: list[int], validators: list[str], required_approvals: int,
                        fee_bps: int = 50, token: tuple[str, int] | None = None) -> str:
        """Open a campaign. ``milestones`` are release fractions in basis points.

        ``token`` optionally defines the campaign's token class as ``(kind, supply)``
        in the same step.
        """
        if not isinstance(campaign_id, str) or not campaign_id:
            raise InvalidId(f"invalid campaign id {campaign_id!r}")
        if campaign_id in self._campaigns:
            raise DuplicateCampaign(campaign_id)
        self.ledger.require(owner)
        decision = self.compliance.check_gate(owner, CREATE_CAMPAIGN)
        if not decision:
            raise GateDenied(owner, decision.reason)
        check_amount(goal, "goal")
        if goal == 0:
            raise ZeroAmount("goal must be positive")
        check_bps(fee_bps)
        if isinstance(deadline, bool) or not isinstance(deadline, int) or deadline <= self.ledger.now:
            raise PastDeadline(f"deadline {deadline!r} is not after now={self.ledger.now}")
        if not milestones or any(isinstance(b, bool) or not isinstance(b, int) or b <= 0 for b in milestones):
            raise BadMilestoneSchedule("milestones must be positive basis-point integers")
        if sum(milestones) != BPS_DENOMINATOR:
            raise BadMilestoneSchedule(f"milestone fractions sum to {sum(milestones)} bps, not 10000")
        validator_set = frozenset(validators)
        if len(validator_set) != len(validators):
            raise BadMilestoneSchedule("duplicate validator")
        for v in validators:
            self.ledger.require(v)
        if (isinstance(required_approvals, bool) or not isinstance(required_approvals, int)
                or not 1 <= required_approvals <= len(validator_set)):
            raise BadMilestoneSchedule(f"need 1 <= M <= N, got M={required_approvals!r}, N={len(validator_set)}")
        if token is not None:
            self.tokens.check_define(campaign_id, *token)

        campaign = Campaign(
            campaign_id, owner, goal, deadline, fee_bps,
            [Milestone(i, bps, validator_set, required_approvals) for i, bps in enumerate(milestones)],
        )
        self._campaigns[campaign_id] = campaign
        self.ledger.ensure_system_account(campaign.escrow)
        self.ledger.record("CREATE_CAMPAIGN", {
            "campaign": campaign_id, "owner": owner, "goal": goal, "deadline": deadline,
            "fee_bps": fee_bps, "milestones": list(milestones), "validators": sorted(validator_set),
            "required_approvals": required_approvals,
        })
        if token is not None:
            self.tokens.define(campaign_id, *token)
        return campaign_id

    def define_token(self, campaign_id: str, kind, total_supply: int):
        campaign = self.get(campaign_id)
        if campaign.state is not CampaignState.ACTIVE:
            raise CampaignNotActive(campaign_id)
        return self.tokens.define(campaign_id, kind, total_supply)

    def contribute(self, campaign_id: str, contributor: str, amount: int) -> int:
        """Pay ``amount`` into escrow; the platform fee is taken from it. Returns the new net total."""
        campaign = self.get(campaign_id)
        if campaign.state is not CampaignState.ACTIVE:
            raise CampaignNotActive(f"{campaign_id} is {campaign.state.value}")
        if self.ledger.now >= campaign.deadline:
            raise DeadlinePassed(f"{campaign_id} closed at {campaign.deadline}")
        self.ledger.require(contributor)
        check_amount(amount)
        decision = self.compliance.check_gate(contributor, CONTRIBUTE, amount)
        if not decision:
            raise GateDenied(contributor, decision.reason)
        net, fee = self.ledger.apply_transfer(contributor, campaign.escrow, amount, campaign.fee_bps,
                                              self.fee_sink)
        campaign.contributions[contributor] = campaign.contributions.get(contributor, 0) + net
        campaign.total_raised += net
        campaign.gross_contributed += amount
        campaign.fees_paid += fee
        self.ledger.record("CONTRIBUTE", {"campaign": campaign_id, "contributor": contributor,
                                          "gross": amount, "net": net, "fee": fee})
        return campaign.contributions[contributor]

    def finalize(self, campaign_id: str) -> CampaignState:
        campaign = self.get(campaign_id)
        if campaign.state is not CampaignState.ACTIVE:
            raise AlreadyFinalized(f"{campaign_id} is {campaign.state.value}")
        if self.ledger.now < campaign.deadline:
            raise TooEarly("Funding period still active")
        funded = campaign.total_raised >= campaign.goal
        campaign.state = CampaignState.FUNDED if funded else CampaignState.FAILED
        self.ledger.record("FINALIZE", {"campaign": campaign_id, "state": campaign.state.value,
                                        "raised": campaign.total_raised, "goal": campaign.goal})
        if funded and campaign_id in self.tokens.classes:
            self.tokens.allocate(campaign_id, campaign.contributions)
        return campaign.state

    def refund(self, campaign_id: str, contributor: str) -> int:
        """Return a contributor's net contribution from a failed campaign.

        Mirrors the escrow contract: deadline guard first, then the contribution
        is zeroed before the funds move.
        """
        campaign = self.get(campaign_id)
        if self.ledger.now < campaign.deadline:
            raise FundingStillActive()
        if campaign.state is not CampaignState.FAILED:
            raise CampaignNotFailed(f"{campaign_id} is {campaign.state.value}")
        amount = campaign.contributions.get(contributor, 0)
        if amount == 0:
            raise NothingToRefund(contributor)
        campaign.contributions[contributor] = 0
        self.ledger.apply_transfer(campaign.escrow, contributor, amount)
        campaign.refunded += amount
        self.ledger.record("REFUND", {"campaign": campaign_id, "contributor": contributor, "amount": amount})
        return amount

    def _milestone(self, campaign: Campaign, index: int) -> Milestone:
        if isinstance(index, bool) or not isinstance(index, int) or not 0 <= index < len(campaign.milestones):
            raise UnknownMilestone(f"{campaign.id} has no milestone {index!r}")
        return campaign.milestones[index]

    def approve_milestone(self, campaign_id: str, index: int, validator: str) -> int:
        campaign = self.get(campaign_id)
        milestone = self._milestone(campaign, index)
        if milestone.status is MilestoneStatus.DISBURSED:
            raise AlreadyDisbursed(f"milestone {index}")
        if campaign.state is not CampaignState.FUNDED:
            raise NotFunded(f"{campaign_id} is {campaign.state.value}")
        if validator not in milestone.validators:
            raise NotValidator(validator)
        if index != campaign.next_milestone:
            raise OutOfOrder(f"milestone {campaign.next_milestone} must be disbursed first")
        milestone.approvals.add(validator)
        if len(milestone.approvals) >= milestone.required_approvals:
            milestone.status = MilestoneStatus.APPROVED
        self.ledger.record("APPROVE", {"campaign": campaign_id, "milestone": index, "validator": validator,
                                       "approvals": len(milestone.approvals),
                                       "status": milestone.status.value})
        return len(milestone.approvals)

    def disburse_milestone(self, campaign_id: str, index: int) -> int:
        campaign = self.get(campaign_id)
        milestone = self._milestone(campaign, index)
        if milestone.status is MilestoneStatus.DISBURSED:
            raise AlreadyDisbursed(f"milestone {index}")
        if campaign.state is not CampaignState.FUNDED:
            raise NotFunded(f"{campaign_id} is {campaign.state.value}")
        if index != campaign.next_milestone:
            raise OutOfOrder(f"milestone {campaign.next_milestone} must be disbursed first")
        if milestone.status is not MilestoneStatus.APPROVED:
            raise NotApproved(f"milestone {index} has {len(milestone.approvals)}/{milestone.required_approvals}")
        last = index == len(campaign.milestones) - 1
        escrow_left = campaign.total_raised - campaign.disbursed
        amount = escrow_left if last else campaign.total_raised * milestone.release_bps // BPS_DENOMINATOR
        if amount:
            self.ledger.apply_transfer(campaign.escrow, campaign.owner, amount)
        milestone.status = MilestoneStatus.DISBURSED
        milestone.released = amount
        campaign.disbursed += amount
        if last:
            campaign.state = CampaignState.COMPLETED
        self.ledger.record("DISBURSE", {"campaign": campaign_id, "milestone": index, "amount": amount,
                                        "owner": campaign.owner, "state": campaign.state.value})
        return amount

    def check_invariants(self) -> None:
        for c in self._campaigns.values():
            escrow = self.ledger.balance(c.escrow)
            if escrow != c.total_raised - c.disbursed - c.refunded:
                raise InvariantViolation(f"{c.id}: escrow {escrow} != raised - disbursed - refunded")
            if sum(c.contributions.values()) != c.total_raised - c.refunded:
                raise InvariantViolation(f"{c.id}: contribution map out of sync")
            if c.gross_contributed != c.total_raised + c.fees_paid:
                raise InvariantViolation(f"{c.id}: gross != net + fee")
            if c.disbursed and c.state not in (CampaignState.FUNDED, CampaignState.COMPLETED):
                raise InvariantViolation(f"{c.id}: disbursed from {c.state.value} campaign")
            if c.refunded and c.state is not CampaignState.FAILED:
                raise InvariantViolation(f"{c.id}: refunded from {c.state.value} campaign")
            if c.state is CampaignState.COMPLETED and escrow != 0:
                raise InvariantViolation(f"{c.id}: completed with {escrow} left in escrow")

    def snapshot(self) -> dict:
        return {cid: c.to_dict() for cid, c in sorted(self._campaigns.items())}
