from functools import lru_cache

import pytest

from lgms.critsolve import critical_set
from lgms.hmscheck import verify_theorem_a
from lgms.toric_core import build_variety


@lru_cache(maxsize=None)
def variety(name):
    return build_variety(name)


@lru_cache(maxsize=None)
def crit(name, t=None):
    return critical_set(variety(name), t)


@lru_cache(maxsize=None)
def theorem_a(name, t=None):
    return verify_theorem_a(variety(name), t, crit=crit(name, t))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def cached():
    return {"variety": variety, "crit": crit, "theorem_a": theorem_a}
