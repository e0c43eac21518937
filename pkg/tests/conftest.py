import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from energykg.vocab import TermRegistry

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"
QUERIES = ROOT / "queries"

sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture(scope="session")
def registry():
    return TermRegistry()


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def month_graphs(tmp_path_factory):
    """The one-month household and climate fixtures converted through the CLI."""
    from energykg.cli import main

    out = tmp_path_factory.mktemp("graphs")
    cfg = str(FIXTURES / "config.json")
    energy, climate = out / "household.nt", out / "climate.nt"
    assert main(["--config", cfg, "convert", str(FIXTURES / "household_month.csv"), "--out", str(energy)]) == 0
    assert main(["--config", cfg, "climate", str(FIXTURES / "climate_month.csv"), "--out", str(climate)]) == 0
    return [energy, climate]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = ""
        if report.outcome == "skipped" and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2]
        _ACCEPTANCE.append((marker.args[0], status, detail))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(_ACCEPTANCE):
        line = f"{status:4}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
