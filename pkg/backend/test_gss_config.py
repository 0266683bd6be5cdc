#!/usr/bin/env python3
"""
Test script for configuration profiles and how the modules pick them up.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import io
from contextlib import redirect_stderr, redirect_stdout

from channel_params import ChannelParams
from erasure_channel import enumerate_admissible
from gss_cli import EXIT_OK, main
from gss_config import (
    DevelopmentGSSConfig, GSSConfig, ProductionGSSConfig, TestingGSSConfig, active_config, get_config,
)
from gss_errors import BudgetExceededError
from suite_runner import run_suite


def test_profiles_by_name():
    assert get_config('development') is DevelopmentGSSConfig
    assert get_config('production') is ProductionGSSConfig
    assert get_config('testing') is TestingGSSConfig
    assert get_config('no-such-env') is DevelopmentGSSConfig
    assert issubclass(active_config, GSSConfig)


def test_testing_env_lowers_budget():
    saved = os.environ.get('GSS_ENV')
    os.environ['GSS_ENV'] = 'testing'
    try:
        config = get_config()
        assert config is TestingGSSConfig
        assert config.BUDGET == 500000
        assert config.WORKERS == 1
        assert config.validate_config()
    finally:
        if saved is None:
            del os.environ['GSS_ENV']
        else:
            os.environ['GSS_ENV'] = saved


def test_modules_read_the_active_profile():
    params = ChannelParams(3, 5, 5)
    saved = active_config.BUDGET
    active_config.BUDGET = 5
    try:
        list(enumerate_admissible(params, 8))
    except BudgetExceededError as e:
        assert e.budget == 5
    else:
        raise AssertionError("search must honour the active budget")
    finally:
        active_config.BUDGET = saved
    assert sum(1 for _ in enumerate_admissible(params, 6)) == 47


def test_debug_run_prints_config_banner():
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(['rates', '--a', '3', '--b', '5', '--tau', '5', '--log-level', 'DEBUG'])
    assert code == EXIT_OK
    assert "GSS Toolkit Configuration Summary" in err.getvalue()
    assert active_config.__name__ in err.getvalue()
    assert out.getvalue().startswith('a,b,tau')


if __name__ == "__main__":
    tests = [
        ("Profiles By Name", test_profiles_by_name),
        ("Testing Env Budget", test_testing_env_lowers_budget),
        ("Active Profile Used", test_modules_read_the_active_profile),
        ("Debug Config Banner", test_debug_run_prints_config_banner),
    ]
    sys.exit(0 if run_suite("GSS CONFIG TESTS", tests) else 1)
