from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from von.field import QSqrt2Model
from von.generic import GenericModel

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def generic2():
    return GenericModel(2, seed=0)


@pytest.fixture
def field():
    return QSqrt2Model(seed=0)


@pytest.fixture(params=["generic", "qsqrt2"])
def model2(request):
    return GenericModel(2, seed=0) if request.param == "generic" else QSqrt2Model(seed=0)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, text = mark.kwargs["number"], mark.kwargs["text"]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        verdict = "PASS" if rep.passed else "FAIL"
        _CRITERIA[number] = (verdict, text)
        print(f"\ncriterion {number}: {verdict}  {text}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        verdict, text = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {text}")
