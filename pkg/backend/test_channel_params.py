#!/usr/bin/env python3
"""
Test script for channel parameters and the closed-form rate formulas.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from decimal import Decimal
from fractions import Fraction

from channel_params import (
    TABLE_ONE, ChannelParams, Regime, classify_regime, decompose, iter_params,
    max_gsde_rate, mu, optimal_rate, rate_gain, rate_summary, render_rate,
    rate_to_str, ss_rate, table_one,
)
from gss_errors import InvalidParamsError
from suite_runner import run_suite


def test_invalid_params_rejected():
    for bad in [(0, 1, 1), (3, 2, 5), (1, 2, 1), (2, 3, 2)]:
        try:
            ChannelParams(*bad)
        except InvalidParamsError:
            continue
        raise AssertionError(f"{bad} should be rejected")

    try:
        ChannelParams(True, 1, 1)
    except InvalidParamsError:
        pass
    else:
        raise AssertionError("booleans are not integers here")


def test_decomposition():
    dec = decompose(ChannelParams(3, 5, 5))
    assert (dec.m, dec.delta) == (1, 1)

    dec = decompose(ChannelParams(10, 18, 20))
    assert (dec.m, dec.delta) == (1, 3)

    dec = decompose(ChannelParams(1, 1, 1))
    assert (dec.m, dec.delta) == (2, 0)


def test_exact_rates_for_355():
    params = ChannelParams(3, 5, 5)
    assert optimal_rate(params) == Fraction(3, 8)
    assert ss_rate(params) == Fraction(1, 4)
    assert mu(params) == Fraction(3, 7)
    assert max_gsde_rate(params) == Fraction(3, 10)
    assert rate_gain(params) == Fraction(1, 20)


def test_regimes():
    assert classify_regime(ChannelParams(3, 5, 5)) is Regime.GSDE_GAIN
    assert classify_regime(ChannelParams(1, 3, 6)) is Regime.SS_EQUIVALENT
    assert classify_regime(ChannelParams(2, 3, 5)) is Regime.SS_EQUIVALENT
    assert classify_regime(ChannelParams(4, 4, 8)) is Regime.DEGENERATE_EQUAL_AB
    assert max_gsde_rate(ChannelParams(4, 4, 8)) == Fraction(5, 9)


def test_table_one_rates_reproduced():
    """All fifteen published rates at their printed precision."""
    assert [str(p) for p in table_one()] == ['(3,5,5)', '(4,5,10)', '(5,8,16)', '(9,15,15)', '(10,18,20)']
    for row in TABLE_ONE:
        params = ChannelParams(*row['params'])
        for key, func in (('r_opt', optimal_rate), ('r_ss', ss_rate), ('r_gss', max_gsde_rate)):
            rendered = Decimal(render_rate(func(params)))
            assert rendered == Decimal(row[key]), f"{params} {key}: {rendered} != {row[key]}"


def test_table_one_exact_fractions():
    assert optimal_rate(ChannelParams(10, 18, 20)) == Fraction(11, 29)
    assert max_gsde_rate(ChannelParams(10, 18, 20)) == Fraction(11, 37)
    assert optimal_rate(ChannelParams(4, 5, 10)) == Fraction(7, 12)
    assert ss_rate(ChannelParams(4, 5, 10)) == Fraction(5, 9)
    assert max_gsde_rate(ChannelParams(4, 5, 10)) == Fraction(14, 25)
    assert ss_rate(ChannelParams(5, 8, 16)) == Fraction(6, 11)
    assert max_gsde_rate(ChannelParams(5, 8, 16)) == Fraction(24, 43)
    assert optimal_rate(ChannelParams(9, 15, 15)) == Fraction(7, 22)
    assert max_gsde_rate(ChannelParams(9, 15, 15)) == Fraction(1, 4)


def test_rate_ordering_over_sweep():
    for params in iter_params(12):
        r_ss, r_gss, r_opt = ss_rate(params), max_gsde_rate(params), optimal_rate(params)
        assert r_ss <= r_gss <= r_opt, f"{params}: {r_ss} {r_gss} {r_opt}"
        if classify_regime(params) is Regime.GSDE_GAIN:
            assert rate_gain(params) > 0, params
        else:
            assert r_gss == r_ss, params


def test_optimal_rate_monotone_in_a():
    rates = [optimal_rate(ChannelParams(a, 3, 6)) for a in (1, 2, 3)]
    assert rates[0] > rates[1] > rates[2]


def test_rendering():
    assert render_rate(Fraction(1, 4)) == '0.250'
    assert render_rate(Fraction(5, 9)) == '0.556'
    assert render_rate(Fraction(1, 2), places=1) == '0.5'
    assert rate_to_str(Fraction(3, 10)) == '3/10'
    assert rate_to_str(Fraction(0, 1)) == '0/1'


def test_iteration_order_and_serialization():
    triples = list(iter_params(2))
    assert [str(p) for p in triples] == ['(1,1,1)', '(1,1,2)', '(1,2,2)', '(2,2,2)']
    params = ChannelParams(3, 5, 5)
    assert ChannelParams.from_dict(params.to_dict()) == params

    summary = rate_summary(params)
    assert summary['regime'] == 'GSDE_GAIN'
    assert summary['r_gss'] == Fraction(3, 10)


if __name__ == "__main__":
    tests = [
        ("Invalid Params", test_invalid_params_rejected),
        ("Decomposition", test_decomposition),
        ("Exact Rates (3,5,5)", test_exact_rates_for_355),
        ("Regimes", test_regimes),
        ("Published Table Rates", test_table_one_rates_reproduced),
        ("Published Table Fractions", test_table_one_exact_fractions),
        ("Rate Ordering Sweep", test_rate_ordering_over_sweep),
        ("Optimal Rate Monotone", test_optimal_rate_monotone_in_a),
        ("Rendering", test_rendering),
        ("Iteration And Serialization", test_iteration_order_and_serialization),
    ]
    sys.exit(0 if run_suite("CHANNEL PARAMS TESTS", tests) else 1)
