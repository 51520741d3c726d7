"""NIST SP 800-22 statistical test battery."""

from .battery import (
    REPORT_SCHEMA,
    TestOutcome,
    TestReport,
    frequency_test,
    run_battery,
    run_test,
)
from .params import (
    CATEGORY_LABELS,
    TEST_CATEGORIES,
    TEST_IDS,
    TEST_NAMES,
    TestParams,
)
from .suite import aperiodic_templates, berlekamp_massey_length

__all__ = [
    "REPORT_SCHEMA",
    "TestOutcome",
    "TestReport",
    "frequency_test",
    "run_battery",
    "run_test",
    "CATEGORY_LABELS",
    "TEST_CATEGORIES",
    "TEST_IDS",
    "TEST_NAMES",
    "TestParams",
    "aperiodic_templates",
    "berlekamp_massey_length",
]
