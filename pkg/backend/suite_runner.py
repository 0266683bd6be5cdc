"""
Runner used by the test scripts when they are executed directly
(`python test_streaming_codec.py`). Under pytest the test_* functions
are collected on their own.
"""

import logging
from typing import Callable, List, Tuple

logger = logging.getLogger(__name__)


def run_suite(title: str, tests: List[Tuple[str, Callable[[], None]]]) -> bool:
    """Run each test, log a PASS/FAIL line per test and a summary; True if all passed."""
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    logger.info("=" * 60)
    logger.info(title)
    logger.info("=" * 60)

    results = []
    for test_name, test_func in tests:
        try:
            test_func()
            results.append((test_name, True))
            logger.info(f"✓ {test_name}")
        except Exception as e:
            results.append((test_name, False))
            logger.error(f"❌ {test_name}: {type(e).__name__}: {e}")

    passed = sum(1 for _, ok in results if ok)
    logger.info("=" * 60)
    logger.info(f"Overall Results: {passed}/{len(results)} tests passed")
    if passed == len(results):
        logger.info("✅ All tests passed!")
        return True
    logger.error("❌ Some tests failed. Please review the logs above.")
    return False
