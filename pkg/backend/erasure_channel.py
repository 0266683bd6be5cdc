"""
Delay-constrained sliding-window erasure channel.
Admissibility checks, exhaustive admissible-pattern enumeration,
a Gilbert-Elliott loss generator and per-codeword loss profiles.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Any, FrozenSet, Iterable, Iterator, Optional, Sequence

import numpy as np

from channel_params import ChannelParams
from gss_config import active_config
from gss_errors import BudgetExceededError, InvalidParamsError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErasurePattern:
    """Erased time slots inside the horizon [0, horizon)."""
    horizon: int
    erased: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        erased = frozenset(int(t) for t in self.erased)
        if self.horizon < 0:
            raise InvalidParamsError(f"horizon must be non-negative, got {self.horizon}")
        outside = sorted(t for t in erased if not 0 <= t < self.horizon)
        if outside:
            raise InvalidParamsError(f"erased slots {outside} fall outside [0, {self.horizon})")
        object.__setattr__(self, 'erased', erased)

    def is_erased(self, t: int) -> bool:
        return t in self.erased

    def sorted_erased(self) -> List[int]:
        return sorted(self.erased)

    def to_dict(self) -> Dict[str, Any]:
        return {'horizon': self.horizon, 'erased': self.sorted_erased()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ErasurePattern':
        return cls(int(data['horizon']), frozenset(data.get('erased', [])))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> 'ErasurePattern':
        return cls.from_dict(json.loads(text))


def _windows(horizon: int, w: int) -> range:
    """Start slots of the windows checked; a short horizon is one partial window."""
    return range(0, max(horizon - w, 0) + 1)


def _window_ok(erased_in_window: Sequence[int], params: ChannelParams) -> bool:
    count = len(erased_in_window)
    if count <= params.a:
        return True
    # Burst branch: a single run of consecutive slots, at most b long
    return count <= params.b and erased_in_window[-1] - erased_in_window[0] == count - 1


def is_admissible(pattern: ErasurePattern, params: ChannelParams) -> bool:
    """Every window of tau+1 slots holds at most a erasures or one burst of at most b."""
    erased = pattern.sorted_erased()
    if not erased:
        return True
    for start in _windows(pattern.horizon, params.w):
        inside = [t for t in erased if start <= t < start + params.w]
        if not _window_ok(inside, params):
            return False
    return True


def _extension_ok(erased: List[int], slot: int, horizon: int, params: ChannelParams) -> bool:
    """Admissibility of erased + [slot], checking only windows that contain slot."""
    candidate = erased + [slot]
    candidate.sort()
    first = max(0, slot - params.w + 1)
    last = min(slot, max(horizon - params.w, 0))
    for start in range(first, last + 1):
        inside = [t for t in candidate if start <= t < start + params.w]
        if not _window_ok(inside, params):
            return False
    return True


def _is_maximal(erased: List[int], horizon: int, params: ChannelParams) -> bool:
    taken = set(erased)
    return not any(
        _extension_ok(erased, slot, horizon, params) for slot in range(horizon) if slot not in taken
    )


def enumerate_admissible(
    params: ChannelParams,
    horizon: int,
    maximal_only: bool = False,
    budget: int = None,
) -> Iterator[ErasurePattern]:
    """
    Yield every admissible pattern once, in lexicographic order of the sorted
    erased sets (empty pattern first).

    Backtracking prunes inadmissible extensions; removing erasures keeps a
    pattern admissible, so no admissible superset is lost. With maximal_only
    only patterns that admit no further erasure are yielded; recovery under a
    pattern implies recovery under its subsets.
    """
    budget = active_config.BUDGET if budget is None else budget
    if horizon < 0:
        raise InvalidParamsError(f"horizon must be non-negative, got {horizon}")

    visited = 0
    stack: List[List[int]] = [[]]
    while stack:
        erased = stack.pop()
        visited += 1
        if visited > budget:
            logger.error(f"Admissible-pattern search for {params} H={horizon} exceeded budget {budget}")
            raise BudgetExceededError(
                f"admissible-pattern search for {params} over horizon {horizon} exceeded budget {budget}",
                size=visited, budget=budget,
            )

        if not maximal_only or _is_maximal(erased, horizon, params):
            yield ErasurePattern(horizon, frozenset(erased))

        start = erased[-1] + 1 if erased else 0
        children = [erased + [slot] for slot in range(start, horizon)
                    if _extension_ok(erased, slot, horizon, params)]
        # Reverse so the smallest extension is popped first
        stack.extend(reversed(children))


def count_admissible(params: ChannelParams, horizon: int, maximal_only: bool = False, budget: int = None) -> int:
    return sum(1 for _ in enumerate_admissible(params, horizon, maximal_only, budget))


class ChannelState(IntEnum):
    GOOD = 0
    BAD = 1


@dataclass(frozen=True)
class GeConfig:
    """Two-state Gilbert-Elliott loss model."""
    p_good_to_bad: float
    p_bad_to_good: float
    loss_good: float
    loss_bad: float
    seed: int

    FIELDS = ('p_good_to_bad', 'p_bad_to_good', 'loss_good', 'loss_bad', 'seed')

    def __post_init__(self):
        for name in self.FIELDS[:4]:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParamsError(f"{name} must lie in [0, 1], got {value}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParamsError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.FIELDS}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GeConfig':
        missing = [name for name in cls.FIELDS if name not in data]
        if missing:
            raise InvalidParamsError(f"GE config is missing fields: {', '.join(missing)}")
        return cls(
            p_good_to_bad=float(data['p_good_to_bad']),
            p_bad_to_good=float(data['p_bad_to_good']),
            loss_good=float(data['loss_good']),
            loss_bad=float(data['loss_bad']),
            seed=int(data['seed']),
        )

    @classmethod
    def from_file(cls, path: str) -> 'GeConfig':
        with open(path, 'r', encoding='utf-8') as handle:
            return cls.from_dict(json.load(handle))

    @classmethod
    def defaults(cls, seed: Optional[int] = None) -> 'GeConfig':
        data = active_config.get_ge_defaults()
        if seed is not None:
            data['seed'] = seed
        return cls.from_dict(data)

    def with_seed(self, seed: int) -> 'GeConfig':
        return GeConfig(self.p_good_to_bad, self.p_bad_to_good, self.loss_good, self.loss_bad, seed)


def ge_sample(config: GeConfig, length: int) -> ErasurePattern:
    """Run the chain from the good state; each slot is lost with its state's loss probability."""
    if length < 1:
        raise InvalidParamsError(f"length must be at least 1, got {length}")

    rng = np.random.default_rng(config.seed)
    loss_draws = rng.random(length)
    move_draws = rng.random(length)

    state = ChannelState.GOOD
    erased = []
    for t in range(length):
        loss = config.loss_good if state is ChannelState.GOOD else config.loss_bad
        if loss_draws[t] < loss:
            erased.append(t)
        if state is ChannelState.GOOD:
            state = ChannelState.BAD if move_draws[t] < config.p_good_to_bad else ChannelState.GOOD
        else:
            state = ChannelState.GOOD if move_draws[t] < config.p_bad_to_good else ChannelState.BAD

    logger.debug(f"GE sample (seed={config.seed}) erased {len(erased)}/{length} slots")
    return ErasurePattern(length, frozenset(erased))


def codeword_loss_profile(pattern: ErasurePattern, delta_vec: Iterable[int]) -> Dict[int, int]:
    """
    Erased-symbol count of every codeword whose span [t, t+tau] lies inside
    the horizon, keyed by anchor time t.
    """
    entries = list(delta_vec)
    span = len(entries)
    profile = {}
    for anchor in range(0, pattern.horizon - span + 1):
        profile[anchor] = sum(
            count for offset, count in enumerate(entries) if (anchor + offset) in pattern.erased
        )
    return profile


def max_codeword_loss(pattern: ErasurePattern, delta_vec: Iterable[int]) -> int:
    profile = codeword_loss_profile(pattern, delta_vec)
    return max(profile.values(), default=0)
