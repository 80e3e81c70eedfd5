import pytest

from toprec.models import KontsevichTimes, PQModel, build_airy, build_kontsevich, build_pq
from toprec.recursion import CorrelatorTable
from toprec.specfile import load_preset

_criteria: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def airy():
    return build_airy()


@pytest.fixture(scope="session")
def pure_gravity():
    return build_pq(PQModel(3, 2, {1: 3}))


@pytest.fixture(scope="session")
def swapped_gravity():
    return load_preset("pure-gravity-swapped")


@pytest.fixture(scope="session")
def kontsevich_1111():
    return build_kontsevich(KontsevichTimes({3: 1, 5: 1, 7: 1, 9: 1}))


@pytest.fixture(scope="session")
def pg_table(pure_gravity):
    return CorrelatorTable(pure_gravity)


@pytest.fixture(scope="session")
def airy_table(airy):
    return CorrelatorTable(airy)


@pytest.fixture(scope="session")
def k_table(kontsevich_1111):
    return CorrelatorTable(kontsevich_1111)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    num = int(name.split("_")[2])
    doc = report.user_properties and dict(report.user_properties).get("title", "") or ""
    status = "PASS" if report.passed else "FAIL"
    _criteria[num] = (status, doc)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        status, title = _criteria[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {title}")
