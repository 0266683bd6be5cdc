#!/usr/bin/env python3
"""
Test script for the sliding-window erasure channel: admissibility,
enumeration, Gilbert-Elliott sampling and codeword loss profiles.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from channel_params import ChannelParams
from dispersion_engine import DispersionVector
from erasure_channel import (
    ErasurePattern, GeConfig, codeword_loss_profile, count_admissible,
    enumerate_admissible, ge_sample, is_admissible, max_codeword_loss,
)
from gss_errors import BudgetExceededError, InvalidParamsError
from suite_runner import run_suite

P355 = ChannelParams(3, 5, 5)
GSS_355 = DispersionVector((3, 1, 1, 1, 1, 3))


def _pattern(horizon, erased):
    return ErasurePattern(horizon, frozenset(erased))


def test_admissibility_examples():
    assert is_admissible(_pattern(6, {0, 1, 2, 3, 4}), P355)
    assert is_admissible(_pattern(6, {0, 2, 4}), P355)
    assert not is_admissible(_pattern(6, {0, 1, 2, 3, 5}), P355)
    assert is_admissible(_pattern(6, set()), P355)

    params = ChannelParams(1, 2, 3)
    assert is_admissible(_pattern(5, {0, 1}), params)
    assert not is_admissible(_pattern(5, {0, 2}), params)
    assert is_admissible(_pattern(5, {0, 4}), params)


def test_short_horizon_is_one_window():
    # H < tau + 1: the whole horizon is checked as a single window
    assert is_admissible(_pattern(3, {0, 1, 2}), P355)
    assert is_admissible(_pattern(4, {0, 1, 2, 3}), P355)
    assert not is_admissible(_pattern(5, {0, 1, 2, 4}), P355)


def test_pattern_validation_and_json():
    try:
        _pattern(4, {4})
    except InvalidParamsError:
        pass
    else:
        raise AssertionError("erasures outside the horizon must be rejected")

    pattern = _pattern(8, {5, 1, 2})
    assert pattern.sorted_erased() == [1, 2, 5]
    assert ErasurePattern.from_json(pattern.to_json()) == pattern


def test_enumeration_counts():
    assert count_admissible(P355, 6) == 47
    assert count_admissible(ChannelParams(1, 1, 1), 2) == 3


def test_enumeration_order():
    patterns = [p.sorted_erased() for p in enumerate_admissible(ChannelParams(1, 1, 1), 3)]
    assert patterns == [[], [0], [0, 2], [1], [2]]

    first = next(enumerate_admissible(P355, 12))
    assert first.sorted_erased() == []


def test_enumeration_is_exact():
    """Every yielded pattern is admissible and nothing admissible is missed."""
    params = ChannelParams(2, 3, 4)
    horizon = 7
    yielded = {frozenset(p.erased) for p in enumerate_admissible(params, horizon)}
    brute = set()
    for mask in range(2 ** horizon):
        erased = frozenset(t for t in range(horizon) if mask >> t & 1)
        if is_admissible(_pattern(horizon, erased), params):
            brute.add(erased)
    assert yielded == brute


def test_maximal_only_filter():
    patterns = [p.sorted_erased() for p in enumerate_admissible(ChannelParams(1, 1, 1), 3, maximal_only=True)]
    assert patterns == [[0, 2], [1]]

    for pattern in enumerate_admissible(P355, 8, maximal_only=True):
        for slot in range(8):
            if slot in pattern.erased:
                continue
            assert not is_admissible(_pattern(8, pattern.erased | {slot}), P355)


def test_removing_an_erasure_keeps_admissibility():
    for pattern in enumerate_admissible(P355, 8):
        for slot in pattern.erased:
            assert is_admissible(_pattern(8, pattern.erased - {slot}), P355), (pattern.sorted_erased(), slot)


def test_enumeration_budget():
    try:
        count_admissible(P355, 6, budget=10)
    except BudgetExceededError as e:
        assert e.budget == 10
    else:
        raise AssertionError("search above the budget must stop")


def test_ge_extremes_and_determinism():
    lossless = GeConfig(0.5, 0.5, 0.0, 0.0, seed=1)
    assert ge_sample(lossless, 100).erased == frozenset()

    blackout = GeConfig(0.5, 0.5, 1.0, 1.0, seed=1)
    assert ge_sample(blackout, 50).erased == frozenset(range(50))

    config = GeConfig.defaults(seed=42)
    assert ge_sample(config, 500) == ge_sample(config, 500)
    assert ge_sample(config.with_seed(43), 500).horizon == 500


def test_ge_config_validation():
    try:
        GeConfig.from_dict({'p_good_to_bad': 0.1, 'p_bad_to_good': 0.2, 'loss_good': 0.0, 'loss_bad': 1.0})
    except InvalidParamsError as e:
        assert 'seed' in str(e)
    else:
        raise AssertionError("all five GE fields are mandatory")

    try:
        GeConfig(1.5, 0.1, 0.0, 1.0, seed=0)
    except InvalidParamsError:
        pass
    else:
        raise AssertionError("probabilities outside [0, 1] must be rejected")

    config = GeConfig.defaults(seed=9)
    assert GeConfig.from_dict(config.to_dict()) == config


def test_codeword_loss_profile_examples():
    profile = codeword_loss_profile(_pattern(6, {0, 1, 2, 3, 4}), GSS_355)
    assert profile == {0: 7}

    profile = codeword_loss_profile(_pattern(6, {0, 1, 5}), GSS_355)
    assert profile == {0: 7}

    profile = codeword_loss_profile(_pattern(10, set()), GSS_355)
    assert set(profile) == {0, 1, 2, 3, 4} and not any(profile.values())


def test_loss_never_exceeds_r_for_admissible_patterns():
    for pattern in enumerate_admissible(P355, 10, maximal_only=True):
        assert max_codeword_loss(pattern, GSS_355) <= 7, pattern.sorted_erased()


if __name__ == "__main__":
    tests = [
        ("Admissibility", test_admissibility_examples),
        ("Short Horizon", test_short_horizon_is_one_window),
        ("Pattern Validation", test_pattern_validation_and_json),
        ("Enumeration Counts", test_enumeration_counts),
        ("Enumeration Order", test_enumeration_order),
        ("Enumeration Exact", test_enumeration_is_exact),
        ("Maximal Only", test_maximal_only_filter),
        ("Erasure Removal Monotone", test_removing_an_erasure_keeps_admissibility),
        ("Enumeration Budget", test_enumeration_budget),
        ("GE Sampling", test_ge_extremes_and_determinism),
        ("GE Config", test_ge_config_validation),
        ("Loss Profile", test_codeword_loss_profile_examples),
        ("Loss Bound", test_loss_never_exceeds_r_for_admissible_patterns),
    ]
    sys.exit(0 if run_suite("ERASURE CHANNEL TESTS", tests) else 1)
