"""
Channel parameters and closed-form rate formulas for (a, b, tau) streaming codes.
All rates are exact fractions; decimals appear only when rendering.
"""

import logging
from dataclasses import dataclass, asdict
from decimal import Decimal, ROUND_HALF_UP
from enum import Enum
from fractions import Fraction
from typing import Dict, Any, Iterator, List

from gss_errors import InvalidParamsError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelParams:
    """
    Parameters of the delay-constrained sliding-window channel.

    a: max arbitrary erasures per window
    b: max burst length per window
    tau: decoding delay in packets (window size is tau + 1)
    """
    a: int
    b: int
    tau: int

    def __post_init__(self):
        for name in ('a', 'b', 'tau'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidParamsError(f"{name} must be an integer, got {value!r}")
        if not 0 < self.a <= self.b <= self.tau:
            raise InvalidParamsError(
                f"need 0 < a <= b <= tau, got (a={self.a}, b={self.b}, tau={self.tau})"
            )

    @property
    def w(self) -> int:
        return self.tau + 1

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ChannelParams':
        return cls(int(data['a']), int(data['b']), int(data['tau']))

    def __str__(self):
        return f"({self.a},{self.b},{self.tau})"


@dataclass(frozen=True)
class Decomposition:
    """tau + 1 = m*b + delta with 0 <= delta < b."""
    m: int
    delta: int


class Regime(Enum):
    SS_EQUIVALENT = "SS_EQUIVALENT"
    GSDE_GAIN = "GSDE_GAIN"
    DEGENERATE_EQUAL_AB = "DEGENERATE_EQUAL_AB"


def decompose(params: ChannelParams) -> Decomposition:
    m, delta = divmod(params.tau + 1, params.b)
    return Decomposition(m=m, delta=delta)


def optimal_rate(params: ChannelParams) -> Fraction:
    """Optimal rate of any (a, b, tau) streaming code."""
    free = params.tau + 1 - params.a
    return Fraction(free, free + params.b)


def _gain_condition(params: ChannelParams, dec: Decomposition) -> bool:
    # a > (m+1)*delta > 0
    return params.a > (dec.m + 1) * dec.delta > 0


def ss_rate(params: ChannelParams) -> Fraction:
    """
    Rate of the simple streaming (SDE) code.

    Defined for every regime; it is the baseline the generalized embedding
    is compared against.
    """
    dec = decompose(params)
    share = Fraction(min(dec.delta, params.a), params.a)
    return (dec.m - 1 + share) / (dec.m + share)


def mu(params: ChannelParams) -> Fraction:
    """The mu term of the maximum-rate formula (m - 1 + mu) / (m + mu)."""
    dec = decompose(params)
    if _gain_condition(params, dec):
        return Fraction(params.b - params.a + dec.m * dec.delta, (dec.m + 1) * params.b - params.a)
    return Fraction(min(dec.delta, params.a), params.a)


def max_gsde_rate(params: ChannelParams) -> Fraction:
    """Maximum rate achievable by generalized staggered-diagonal embedding with span tau + 1."""
    dec = decompose(params)
    value = mu(params)
    return (dec.m - 1 + value) / (dec.m + value)


def classify_regime(params: ChannelParams) -> Regime:
    dec = decompose(params)
    if not _gain_condition(params, dec):
        return Regime.SS_EQUIVALENT
    if params.a == params.b:
        # mu collapses to delta/a here, so nothing is gained over SS
        return Regime.DEGENERATE_EQUAL_AB
    return Regime.GSDE_GAIN


def rate_gain(params: ChannelParams) -> Fraction:
    """Exact rate improvement of the GSS code over the SS code."""
    return max_gsde_rate(params) - ss_rate(params)


def render_rate(rate: Fraction, places: int = 3) -> str:
    """Render an exact rate as a fixed-point decimal string (round half up)."""
    quantum = Decimal(1).scaleb(-places)
    value = Decimal(rate.numerator) / Decimal(rate.denominator)
    return str(value.quantize(quantum, rounding=ROUND_HALF_UP))


def rate_to_str(rate: Fraction) -> str:
    """Exact rational string such as '3/10' (integers render as '1/1')."""
    return f"{rate.numerator}/{rate.denominator}"


def iter_params(tau_max: int, tau_min: int = 1) -> Iterator[ChannelParams]:
    """Every valid (a, b, tau) with tau_min <= tau <= tau_max, in (tau, b, a) order."""
    for tau in range(tau_min, tau_max + 1):
        for b in range(1, tau + 1):
            for a in range(1, b + 1):
                yield ChannelParams(a, b, tau)


# Published comparison table: (a, b, tau) -> 3-decimal rates and field sizes
TABLE_ONE: List[Dict[str, Any]] = [
    {'params': (3, 5, 5), 'r_opt': '0.375', 'q_opt': 25, 'r_ss': '0.25', 'q_ss': 3, 'r_gss': '0.3', 'q_gss': 9},
    {'params': (4, 5, 10), 'r_opt': '0.583', 'q_opt': 100, 'r_ss': '0.556', 'q_ss': 8, 'r_gss': '0.56', 'q_gss': 24},
    {'params': (5, 8, 16), 'r_opt': '0.6', 'q_opt': 256, 'r_ss': '0.545', 'q_ss': 10, 'r_gss': '0.558', 'q_gss': 42},
    {'params': (9, 15, 15), 'r_opt': '0.318', 'q_opt': 225, 'r_ss': '0.1', 'q_ss': 9, 'r_gss': '0.25', 'q_gss': 27},
    {'params': (10, 18, 20), 'r_opt': '0.379', 'q_opt': 400, 'r_ss': '0.231', 'q_ss': 12, 'r_gss': '0.297', 'q_gss': 36},
]


def table_one() -> List[ChannelParams]:
    """Parameter triples of the published comparison table."""
    return [ChannelParams(*row['params']) for row in TABLE_ONE]


def rate_summary(params: ChannelParams) -> Dict[str, Any]:
    """All closed-form quantities for one triple."""
    dec = decompose(params)
    summary = {
        'a': params.a,
        'b': params.b,
        'tau': params.tau,
        'm': dec.m,
        'delta': dec.delta,
        'regime': classify_regime(params).value,
        'r_opt': optimal_rate(params),
        'r_ss': ss_rate(params),
        'r_gss': max_gsde_rate(params),
    }
    logger.debug(f"Rate summary for {params}: {summary}")
    return summary
