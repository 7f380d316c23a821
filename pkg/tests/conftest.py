from __future__ import annotations

from pathlib import Path

import pytest

from mars import ModelKind, Scenario, Stratification

GOLDEN = Path(__file__).parent / "golden"

HAL_TEXT = """\
scenario "Hal the Diabetic"
actions: take_insulin, dont_take_insulin
values: hals_life, carlas_life, property
stratum 1: hals_life, carlas_life
stratum 2: property
impact take_insulin: hals_life=+1, carlas_life=-1, property=-1
impact dont_take_insulin: hals_life=-1, carlas_life=+1, property=+1
model: additive
"""

HAL_IMPACTS = {
    "take_insulin": {"hals_life": 1, "carlas_life": -1, "property": -1},
    "dont_take_insulin": {"hals_life": -1, "carlas_life": 1, "property": 1},
}
EGALITARIAN = Stratification.of(["hals_life", "carlas_life"], ["property"])
SELFISH = Stratification.of(["hals_life"], ["carlas_life"], ["property"])


def hal(stratification: Stratification = EGALITARIAN, **kw) -> Scenario:
    return Scenario(
        "Hal the Diabetic",
        ("take_insulin", "dont_take_insulin"),
        ("hals_life", "carlas_life", "property"),
        stratification,
        HAL_IMPACTS,
        **kw,
    )


@pytest.fixture
def egalitarian_hal() -> Scenario:
    return hal(EGALITARIAN)


@pytest.fixture
def selfish_hal() -> Scenario:
    return hal(SELFISH, default_model=ModelKind.GLOBAL_MAXIMUM)


@pytest.fixture
def hal_file(tmp_path) -> Path:
    p = tmp_path / "hal.mars"
    p.write_text(HAL_TEXT, encoding="utf-8")
    return p


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        prev = _ACCEPTANCE.get(number)
        if prev is None or prev[1] == "PASS":
            _ACCEPTANCE[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {title}")
