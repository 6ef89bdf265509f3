"""Fixed-point stablecoin amounts.

Amounts are plain ``int`` minor units with six decimals. Helpers here validate
and convert; nothing in the package ever touches ``float`` money.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .errors import InvalidAmount, InvalidFee

DECIMALS = 6
UNIT = 10**DECIMALS
BPS_DENOMINATOR = 10_000
MAX_SUPPLY = 2**63 - 1


def check_amount(value: object, name: str = "amount") -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidAmount(f"{name} must be an integer number of minor units, got {value!r}")
    if value < 0:
        raise InvalidAmount(f"{name} must be non-negative, got {value}")
    return value


def check_bps(value: object, name: str = "fee_bps") -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= BPS_DENOMINATOR:
        raise InvalidFee(f"{name} must be an integer in [0, 10000], got {value!r}")
    return value


def fee_for(gross: int, bps: int) -> int:
    """Fee charged on ``gross`` at ``bps`` basis points, floored."""
    return gross * bps // BPS_DENOMINATOR


def parse_amount(text: str | int) -> int:
    """Parse ``"12.5"`` or ``12500000`` into minor units.

    Integers are taken as minor units already. Strings are decimal coin
    quantities and may carry at most six fractional digits.
    """
    if isinstance(text, int) and not isinstance(text, bool):
        return check_amount(text)
    if not isinstance(text, str):
        raise InvalidAmount(f"cannot parse amount from {text!r}")
    try:
        value = Decimal(text.replace("_", "").replace(",", ""))
    except InvalidOperation:
        raise InvalidAmount(f"cannot parse amount from {text!r}") from None
    if not value.is_finite():
        raise InvalidAmount(f"cannot parse amount from {text!r}")
    scaled = value.scaleb(DECIMALS)
    if scaled != scaled.to_integral_value():
        raise InvalidAmount(f"{text!r} has more than {DECIMALS} decimal places")
    return check_amount(int(scaled))


def format_amount(minor_units: int) -> str:
    whole, frac = divmod(minor_units, UNIT)
    return f"{whole}.{frac:0{DECIMALS}d}"


@dataclass(frozen=True)
class FiatRate:
    """Fiat minor units paid per one whole coin, e.g. ``FiatRate("TRY", 3450)``."""

    currency_code: str
    minor_units_fiat_per_coin: int

    def __post_init__(self):
        code = self.currency_code
        if not (isinstance(code, str) and len(code) == 3 and code.isascii() and code.isalpha()):
            raise ValueError(f"currency code must be 3 letters, got {code!r}")
        rate = self.minor_units_fiat_per_coin
        if isinstance(rate, bool) or not isinstance(rate, int) or rate <= 0:
            raise ValueError(f"rate must be a positive integer, got {rate!r}")


def convert_to_fiat(amount: int, rate: FiatRate) -> int:
    check_amount(amount)
    return amount * rate.minor_units_fiat_per_coin // UNIT
