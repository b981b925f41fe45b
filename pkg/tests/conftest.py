import time

import pytest

from shafstats import build_index, build_sha_table, new_curve, trace_table

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def curve11():
    return new_curve(1, 1)


@pytest.fixture(scope="session")
def table_1e3(curve11):
    return trace_table(curve11, 10**3)


@pytest.fixture(scope="session")
def table_1e4(curve11):
    return trace_table(curve11, 10**4)


@pytest.fixture(scope="session")
def table_1e5(curve11):
    return trace_table(curve11, 10**5)


@pytest.fixture(scope="session")
def sha_1e4(table_1e4):
    return build_sha_table(table_1e4)


@pytest.fixture(scope="session")
def sha_1e5(table_1e5):
    return build_sha_table(table_1e5)


@pytest.fixture(scope="session")
def index_1e5(sha_1e5):
    return build_index(sha_1e5)


@pytest.fixture(scope="session")
def timed_table_1e6(curve11):
    start = time.perf_counter()
    table = trace_table(curve11, 10**6, workers=8)
    return table, time.perf_counter() - start


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
