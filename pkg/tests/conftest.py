from __future__ import annotations

import sys
from fractions import Fraction

from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def small_fractions(max_num: int = 9, max_den: int = 4):
    return st.builds(
        Fraction, st.integers(-max_num, max_num), st.integers(1, max_den)
    )


def nonzero_fractions(max_num: int = 9, max_den: int = 4):
    return small_fractions(max_num, max_den).filter(lambda q: q != 0)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
