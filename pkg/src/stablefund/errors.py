"""Exception hierarchy.

Every rejection raised by an engine operation derives from :class:`EngineError`
and carries a stable ``code`` (the class name) so rejections can be written to
the event log and compared across runs.
"""


class EngineError(Exception):
    """Base class for rejected operations. State is unchanged when raised."""

    @property
    def code(self) -> str:
        return type(self).__name__


# core ledger
class InvalidId(EngineError):
    pass


class DuplicateAccount(EngineError):
    pass


class UnknownAccount(EngineError):
    pass


class InvalidAmount(EngineError):
    pass


class ZeroAmount(EngineError):
    pass


class Overflow(EngineError):
    pass


class InsufficientFunds(EngineError):
    pass


class SelfTransfer(EngineError):
    pass


class InvalidFee(EngineError):
    pass


class ClockError(EngineError):
    pass


# compliance
class IllegalTransition(EngineError):
    pass


class InvalidJurisdiction(EngineError):
    pass


class InvalidWindow(EngineError):
    pass


class GateDenied(EngineError):
    def __init__(self, account: str, reason: str):
        super().__init__(f"{account}: {reason}")
        self.account = account
        self.reason = reason


# campaign
class UnknownCampaign(EngineError):
    pass


class DuplicateCampaign(EngineError):
    pass


class BadMilestoneSchedule(EngineError):
    pass


class PastDeadline(EngineError):
    pass


class CampaignNotActive(EngineError):
    pass


class DeadlinePassed(EngineError):
    pass


class TooEarly(EngineError):
    pass


class AlreadyFinalized(EngineError):
    pass


class FundingStillActive(EngineError):
    def __init__(self, message: str = "Funding period still active"):
        super().__init__(message)


class CampaignNotFailed(EngineError):
    pass


class NothingToRefund(EngineError):
    pass


class UnknownMilestone(EngineError):
    pass


class NotValidator(EngineError):
    pass


class OutOfOrder(EngineError):
    pass


class AlreadyDisbursed(EngineError):
    pass


class NotApproved(EngineError):
    pass


# tokenization
class NotFunded(EngineError):
    pass


class NoTokenClass(EngineError):
    pass


class TokenClassExists(EngineError):
    pass


class NoAllocation(EngineError):
    pass


class InsufficientTokens(EngineError):
    pass


# market
class InvalidOrder(EngineError):
    pass


class UnknownOrder(EngineError):
    pass


class NotOwner(EngineError):
    pass


class AlreadyClosed(EngineError):
    pass


class InvariantViolation(AssertionError):
    """An engine invariant failed. Never expected outside a bug."""


class MalformedScenario(ValueError):
    """The scenario document cannot be parsed or references undefined ids."""


class LogFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
