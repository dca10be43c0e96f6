"""Shared fixtures and the acceptance-criteria reporting hook."""

import json
from pathlib import Path

import pytest

from petwalk.config import Config
from petwalk.profile import load_catalog, load_profiles

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

_acceptance_results: dict[str, str] = {}


@pytest.fixture(scope="session")
def config():
    return Config()


@pytest.fixture(scope="session")
def catalog(config):
    return load_catalog(str(FIXTURES / "pois.json"), config)


@pytest.fixture(scope="session")
def catalog_no_indoor(config):
    return load_catalog(str(FIXTURES / "pois_no_indoor.json"), config)


@pytest.fixture(scope="session")
def profile_u1():
    return load_profiles(str(FIXTURES / "profile.json"))[0]


def trace_events(name: str):
    from petwalk.feed import parse_trace

    with open(FIXTURES / "traces" / name, "r", encoding="utf-8") as fh:
        return list(parse_trace(fh))


def load_json(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- acceptance summary -------------------------------------------------------
#
# Tests named test_criterion_* report one PASS/FAIL line each at the end of
# the run, so the acceptance gate is readable at a glance.


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or not item.name.startswith("test_criterion_"):
        return
    label = item.function.__doc__ or item.name
    _acceptance_results[item.name] = ("PASS" if report.passed else "FAIL", label.strip().splitlines()[0])


def pytest_terminal_summary(terminalreporter, exitstatus):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_acceptance_results):
        status, label = _acceptance_results[name]
        terminalreporter.write_line(f"[{status}] {label}")
