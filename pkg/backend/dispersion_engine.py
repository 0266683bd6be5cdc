"""
Dispersion vectors for generalized staggered-diagonal embedding.
Implements validity checks, effective resilience, the two explicit
constructions and an exhaustive maximum-rate oracle.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Any, Optional, Tuple

import numpy as np

from channel_params import (
    ChannelParams, Regime, decompose, classify_regime, max_gsde_rate,
)
from gss_config import active_config
from gss_errors import (
    BudgetExceededError, InvalidParamsError, RegimeMismatchError, ZeroTotalError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DispersionVector:
    """Per-packet symbol counts (n_1, ..., n_{tau+1}) of one embedded codeword."""
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(x) for x in self.entries)
        if not entries:
            raise InvalidParamsError("dispersion vector must have at least one entry")
        if any(x < 0 for x in entries):
            raise InvalidParamsError(f"dispersion entries must be non-negative, got {entries}")
        object.__setattr__(self, 'entries', entries)

    @property
    def n(self) -> int:
        return sum(self.entries)

    @property
    def span(self) -> int:
        return len(self.entries)

    @property
    def prefix(self) -> Tuple[int, ...]:
        """m_j = n_1 + ... + n_j for j = 1..span."""
        return tuple(int(x) for x in np.cumsum(self.entries))

    @property
    def empty_first_slot(self) -> bool:
        return self.entries[0] == 0

    def to_text(self) -> str:
        return ",".join(str(x) for x in self.entries)

    @classmethod
    def from_text(cls, text: str) -> 'DispersionVector':
        try:
            return cls(tuple(int(part) for part in text.replace(" ", "").split(",") if part))
        except ValueError as e:
            raise InvalidParamsError(f"cannot parse dispersion vector {text!r}: {e}")

    def to_dict(self, params: Optional[ChannelParams] = None) -> Dict[str, Any]:
        data = {'entries': list(self.entries), 'text': self.to_text()}
        if params is not None:
            data['params'] = params.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DispersionVector':
        return cls(tuple(data['entries']))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index):
        return self.entries[index]


@dataclass(frozen=True)
class ResilienceReport:
    """Smallest redundancy r a dispersion vector needs, with the constraint sums behind it."""
    n: int
    r: int
    rate: Fraction
    random_tight: bool
    burst_tight: bool
    random_sum: int
    burst_sum: int
    burst_window: int  # 1-based start of the heaviest b-window

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'r': self.r,
            'rate': f"{self.rate.numerator}/{self.rate.denominator}",
            'random_tight': self.random_tight,
            'burst_tight': self.burst_tight,
            'random_sum': self.random_sum,
            'burst_sum': self.burst_sum,
            'burst_window': self.burst_window,
        }


@dataclass(frozen=True)
class DispersionCheck:
    """Outcome of the (a, b, tau, n, r) dispersion-vector test."""
    valid: bool
    diagnostic: str
    empty_first_slot: bool = False

    def __bool__(self):
        return self.valid


def _require_span(delta_vec: DispersionVector, params: ChannelParams):
    if delta_vec.span != params.w:
        raise InvalidParamsError(
            f"dispersion vector {delta_vec.to_text()} has {delta_vec.span} entries, expected tau+1 = {params.w}"
        )


def _window_sums(entries: Tuple[int, ...], b: int) -> List[int]:
    return [sum(entries[j:j + b]) for j in range(len(entries) - b + 1)]


def effective_resilience(delta_vec: DispersionVector, params: ChannelParams) -> ResilienceReport:
    """
    Minimal r for which the vector satisfies both the a-subset and the
    b-window constraints.

    The a-subset constraint is evaluated on the a largest entries, which
    dominates every other size-a subset.
    """
    _require_span(delta_vec, params)
    n = delta_vec.n
    if n == 0:
        raise ZeroTotalError(f"dispersion vector {delta_vec.to_text()} carries no symbols")

    random_sum = sum(sorted(delta_vec.entries, reverse=True)[:params.a])
    windows = _window_sums(delta_vec.entries, params.b)
    burst_sum = max(windows)
    r = max(random_sum, burst_sum)

    return ResilienceReport(
        n=n,
        r=r,
        rate=Fraction(n - r, n),
        random_tight=random_sum == r,
        burst_tight=burst_sum == r,
        random_sum=random_sum,
        burst_sum=burst_sum,
        burst_window=windows.index(burst_sum) + 1,
    )


def is_dispersion_vector(delta_vec: DispersionVector, params: ChannelParams, r: int) -> DispersionCheck:
    """Check the (a, b, tau, n, r) conditions; the diagnostic names the first violation."""
    if r < 0:
        return DispersionCheck(False, f"r must be non-negative, got {r}")
    if delta_vec.span != params.w:
        return DispersionCheck(False, f"length {delta_vec.span} != tau+1 = {params.w}")
    if delta_vec.n == 0:
        return DispersionCheck(False, "n = 0: vector carries no symbols")

    entries = delta_vec.entries
    empty_first = delta_vec.empty_first_slot
    if empty_first:
        logger.warning(f"Dispersion vector {delta_vec.to_text()} has n_1 = 0")

    windows = _window_sums(entries, params.b)
    for j, total in enumerate(windows, start=1):
        if total > r:
            return DispersionCheck(
                False, f"burst-window [{j}..{j + params.b - 1}] sums to {total} > {r}", empty_first
            )

    order = sorted(range(len(entries)), key=lambda i: (-entries[i], i))[:params.a]
    random_sum = sum(entries[i] for i in order)
    if random_sum > r:
        positions = ",".join(str(i + 1) for i in sorted(order))
        return DispersionCheck(
            False, f"random-subset {{{positions}}} sums to {random_sum} > {r}", empty_first
        )

    largest = max(random_sum, max(windows))
    if largest != r:
        return DispersionCheck(
            False, f"no constraint tight: max constraint sum is {largest} < {r}", empty_first
        )

    return DispersionCheck(True, "ok", empty_first)


def _residue(i: int, b: int) -> int:
    # 1-based residue in [1, b]; i mod b == 0 counts as b
    return (i - 1) % b + 1


def construction1_prediction(params: ChannelParams) -> Tuple[int, int]:
    """(n, r) = (m*a + min(a, delta), a) for the 0/1 construction."""
    dec = decompose(params)
    return dec.m * params.a + min(params.a, dec.delta), params.a


def construction1_rate(params: ChannelParams) -> Fraction:
    """Closed-form rate (n - r) / n of the 0/1 construction."""
    n, r = construction1_prediction(params)
    return Fraction(n - r, n)


def construction1(params: ChannelParams) -> Tuple[DispersionVector, ResilienceReport]:
    """0/1 vector: entry i is 1 iff its residue mod b lies in [1, a]."""
    entries = tuple(1 if _residue(i, params.b) <= params.a else 0 for i in range(1, params.w + 1))
    vec = DispersionVector(entries)
    report = effective_resilience(vec, params)

    predicted = construction1_prediction(params)
    if (report.n, report.r) != predicted:
        logger.error(f"Construction 1 for {params} gave (n, r) = {(report.n, report.r)}, predicted {predicted}")
    elif report.rate != construction1_rate(params):
        logger.error(f"Construction 1 for {params} has rate {report.rate}, closed form gives {construction1_rate(params)}")

    logger.info(f"Construction 1 for {params}: {vec.to_text()} (n={report.n}, r={report.r})")
    return vec, report


def construction2_params(params: ChannelParams) -> Dict[str, int]:
    """Scale t, heavy entry gamma and the resulting (n, r) of the weighted construction."""
    if classify_regime(params) is not Regime.GSDE_GAIN:
        raise RegimeMismatchError(
            f"weighted construction needs b > a > (m+1)*delta > 0, {params} is {classify_regime(params).value}"
        )
    dec = decompose(params)
    gap = params.b - params.a
    t = math.lcm(gap, dec.m) // gap
    step = t * gap // dec.m
    gamma = t + step
    n = t * (dec.m * params.b + dec.delta) + (dec.m + 1) * step
    r = t * params.b + step
    return {'t': t, 'gamma': gamma, 'n': n, 'r': r}


def construction2(params: ChannelParams) -> Tuple[DispersionVector, ResilienceReport]:
    """Weighted vector: gamma at positions 1, b+1, 2b+1, ..., t elsewhere."""
    weights = construction2_params(params)
    entries = tuple(
        weights['gamma'] if _residue(i, params.b) == 1 else weights['t'] for i in range(1, params.w + 1)
    )
    vec = DispersionVector(entries)
    report = effective_resilience(vec, params)

    if (report.n, report.r) != (weights['n'], weights['r']):
        logger.error(
            f"Construction 2 for {params} gave (n, r) = {(report.n, report.r)}, predicted {(weights['n'], weights['r'])}"
        )

    logger.info(f"Construction 2 for {params}: t={weights['t']}, gamma={weights['gamma']}, n={report.n}, r={report.r}")
    return vec, report


def best_dispersion(params: ChannelParams) -> Tuple[DispersionVector, ResilienceReport]:
    """Maximum-rate vector: weighted construction when it gains, 0/1 construction otherwise."""
    if classify_regime(params) is Regime.GSDE_GAIN:
        return construction2(params)
    return construction1(params)


def closed_form_prediction(params: ChannelParams) -> Tuple[int, int]:
    """(n, r) predicted for the vector best_dispersion returns."""
    if classify_regime(params) is Regime.GSDE_GAIN:
        weights = construction2_params(params)
        return weights['n'], weights['r']
    return construction1_prediction(params)


def field_size_bound(params: ChannelParams) -> int:
    """Worst-case sufficient field size ceil(tau^2 / b) + (tau + 1) * b."""
    return -(-params.tau * params.tau // params.b) + params.w * params.b


def scale(delta_vec: DispersionVector, factor: int) -> DispersionVector:
    if factor < 1:
        raise InvalidParamsError(f"scale factor must be a positive integer, got {factor}")
    return DispersionVector(tuple(factor * x for x in delta_vec.entries))


def normalize(delta_vec: DispersionVector) -> DispersionVector:
    """Divide out the gcd of the entries."""
    divisor = math.gcd(*delta_vec.entries)
    if divisor <= 1:
        return delta_vec
    return DispersionVector(tuple(x // divisor for x in delta_vec.entries))


def embedding_kind(delta_vec: DispersionVector) -> str:
    """DE (all ones), SDE (0/1 entries) or GSDE (some entry above 1)."""
    if all(x == 1 for x in delta_vec.entries):
        return "DE"
    if all(x in (0, 1) for x in delta_vec.entries):
        return "SDE"
    return "GSDE"


# Brute-force oracle

@dataclass(frozen=True)
class OracleResult:
    """Best rate found by exhaustive search and the lexicographically smallest witness."""
    params: ChannelParams
    entry_bound: int
    rate: Fraction
    witness: DispersionVector
    space_size: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'params': self.params.to_dict(),
            'entry_bound': self.entry_bound,
            'rate': f"{self.rate.numerator}/{self.rate.denominator}",
            'witness': self.witness.to_text(),
            'space_size': self.space_size,
        }


def oracle_space_size(params: ChannelParams, entry_bound: int) -> int:
    return (entry_bound + 1) ** params.w


def _best_in_chunk(params: ChannelParams, entry_bound: int, first: int) -> Tuple[Fraction, Tuple[int, ...]]:
    """Best (rate, witness) among vectors whose first entry is `first`."""
    rest = params.tau
    if rest:
        tail = np.indices((entry_bound + 1,) * rest).reshape(rest, -1).T
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
    vectors = np.hstack([np.full((tail.shape[0], 1), first, dtype=np.int64), tail.astype(np.int64)])

    n = vectors.sum(axis=1)
    random_sum = np.sort(vectors, axis=1)[:, -params.a:].sum(axis=1)
    cumulative = np.concatenate([np.zeros((vectors.shape[0], 1), dtype=np.int64), np.cumsum(vectors, axis=1)], axis=1)
    burst_sum = (cumulative[:, params.b:] - cumulative[:, :-params.b]).max(axis=1)
    r = np.maximum(random_sum, burst_sum)

    approx = (n - r) / n
    # floats only shortlist; the exact maximum is settled with Fractions
    shortlist = np.flatnonzero(approx >= approx.max() - 1e-9)
    best_rate = max(Fraction(int(n[i] - r[i]), int(n[i])) for i in shortlist)
    for i in shortlist:
        if Fraction(int(n[i] - r[i]), int(n[i])) == best_rate:
            # rows are in lexicographic order, so the first hit is the smallest
            return best_rate, tuple(int(x) for x in vectors[i])
    raise AssertionError("unreachable: shortlist always holds the maximum")


def _merge(left: Tuple[Fraction, Tuple[int, ...]], right: Tuple[Fraction, Tuple[int, ...]]):
    # Max rate, then smallest witness: associative and commutative
    if left[0] != right[0]:
        return left if left[0] > right[0] else right
    return left if left[1] <= right[1] else right


def brute_force_max_rate(
    params: ChannelParams,
    entry_bound: int = None,
    budget: int = None,
    workers: int = None,
) -> OracleResult:
    """
    Exhaustive maximum rate over all vectors with entries in [0, entry_bound]
    and n_1 >= 1.

    The search is split by the value of n_1; chunks may run on worker threads
    and are merged order-independently.
    """
    entry_bound = active_config.ENTRY_BOUND if entry_bound is None else entry_bound
    budget = active_config.BUDGET if budget is None else budget
    workers = active_config.WORKERS if workers is None else workers

    if entry_bound < 1:
        raise InvalidParamsError(f"entry_bound must be at least 1, got {entry_bound}")

    size = oracle_space_size(params, entry_bound)
    if size > budget:
        logger.error(f"Oracle state space {size} for {params} exceeds budget {budget}")
        raise BudgetExceededError(
            f"oracle state space {size} for {params} with bound {entry_bound} exceeds budget {budget}",
            size=size, budget=budget,
        )

    firsts = range(1, entry_bound + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda f: _best_in_chunk(params, entry_bound, f), firsts))
    else:
        partials = [_best_in_chunk(params, entry_bound, f) for f in firsts]

    best = partials[0]
    for partial in partials[1:]:
        best = _merge(best, partial)

    logger.info(f"Oracle {params} bound={entry_bound}: rate {best[0]} witness {best[1]}")
    return OracleResult(
        params=params,
        entry_bound=entry_bound,
        rate=best[0],
        witness=DispersionVector(best[1]),
        space_size=size,
    )


def oracle_matches_formula(result: OracleResult) -> bool:
    return result.rate == max_gsde_rate(result.params)
