"""
Configuration management for the GSS streaming-code toolkit.
Handles environment variables and toolkit settings.
"""

import os
import logging
from dotenv import load_dotenv
from typing import Dict, Any

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


class GSSConfig:
    """Toolkit configuration class."""

    ENV = os.getenv('GSS_ENV', 'development')

    # Enumeration budget: caps oracle state spaces and admissible-pattern searches
    BUDGET = int(os.getenv('GSS_BUDGET', '2000000'))

    # Randomness - every random draw flows from this seed unless overridden
    SEED = int(os.getenv('GSS_SEED', '20210705'))

    # Finite field: q = 2^FIELD_BITS
    FIELD_BITS = int(os.getenv('GSS_FIELD_BITS', '8'))
    SUPPORTED_FIELD_BITS = (8, 16)

    # Brute-force oracle
    ENTRY_BOUND = int(os.getenv('GSS_ENTRY_BOUND', '4'))

    # Worker threads for embarrassingly parallel loops (patterns, trials, sweep cells)
    WORKERS = int(os.getenv('GSS_WORKERS', '1'))

    LOG_LEVEL = os.getenv('GSS_LOG_LEVEL', 'INFO')

    # Gilbert-Elliott defaults for `simulate` - toolkit defaults, not published values
    GE_DEFAULTS = {
        'p_good_to_bad': float(os.getenv('GSS_GE_P_GOOD_TO_BAD', '0.01')),
        'p_bad_to_good': float(os.getenv('GSS_GE_P_BAD_TO_GOOD', '0.3')),
        'loss_good': float(os.getenv('GSS_GE_LOSS_GOOD', '0.001')),
        'loss_bad': float(os.getenv('GSS_GE_LOSS_BAD', '1.0')),
    }

    @classmethod
    def field_order(cls) -> int:
        """Order q of the symbol field."""
        return 2 ** cls.FIELD_BITS

    @classmethod
    def get_ge_defaults(cls) -> Dict[str, Any]:
        """Get Gilbert-Elliott default parameters, seed included."""
        return {**cls.GE_DEFAULTS, 'seed': cls.SEED}

    @classmethod
    def get_run_metadata(cls) -> Dict[str, Any]:
        """Settings echoed into every run report."""
        return {
            'env': cls.ENV,
            'budget': cls.BUDGET,
            'field_order': cls.field_order(),
            'workers': cls.WORKERS,
        }

    @classmethod
    def validate_config(cls) -> bool:
        """Validate that the configuration is usable."""
        problems = []

        if cls.FIELD_BITS not in cls.SUPPORTED_FIELD_BITS:
            problems.append(f"GSS_FIELD_BITS must be one of {cls.SUPPORTED_FIELD_BITS}, got {cls.FIELD_BITS}")

        for name in ('BUDGET', 'ENTRY_BOUND', 'WORKERS'):
            if getattr(cls, name) <= 0:
                problems.append(f"GSS_{name} must be positive, got {getattr(cls, name)}")

        for key, value in cls.GE_DEFAULTS.items():
            if not 0.0 <= value <= 1.0:
                problems.append(f"GE default {key} must lie in [0, 1], got {value}")

        for problem in problems:
            logger.error(problem)

        return not problems

    @classmethod
    def print_config(cls, file=None):
        """Print current configuration."""
        print("=" * 60, file=file)
        print("GSS Toolkit Configuration Summary", file=file)
        print("=" * 60, file=file)

        config_items = [
            ('Environment', cls.ENV),
            ('Profile', cls.__name__),
            ('Enumeration Budget', cls.BUDGET),
            ('Seed', cls.SEED),
            ('Field Order', cls.field_order()),
            ('Oracle Entry Bound', cls.ENTRY_BOUND),
            ('Workers', cls.WORKERS),
            ('Log Level', cls.LOG_LEVEL),
            ('GE Defaults (toolkit)', cls.GE_DEFAULTS),
        ]

        for key, value in config_items:
            print(f"{key:30}: {value}", file=file)

        print("=" * 60, file=file)


class DevelopmentGSSConfig(GSSConfig):
    """Development configuration."""
    DEBUG = True
    TESTING = False


class ProductionGSSConfig(GSSConfig):
    """Production configuration."""
    DEBUG = False
    TESTING = False


class TestingGSSConfig(GSSConfig):
    """Testing configuration."""
    DEBUG = True
    TESTING = True
    BUDGET = 500000
    WORKERS = 1


# Configuration mapping
gss_config = {
    'development': DevelopmentGSSConfig,
    'production': ProductionGSSConfig,
    'testing': TestingGSSConfig,
    'default': DevelopmentGSSConfig
}


def get_config(env: str = None) -> type:
    """Resolve the configuration class for an environment name."""
    return gss_config.get(env or os.getenv('GSS_ENV', GSSConfig.ENV), gss_config['default'])


# Resolved once from GSS_ENV; every module reads settings through this class
active_config = get_config()
