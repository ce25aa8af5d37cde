import pytest

from hemopap.builtin import (
    CONSTANT_RANGE,
    EXAMPLE6_OVERRIDES,
    EXAMPLE6_RANGE,
    constant_spec,
    decay_spec,
    example6_spec,
    extinction_spec,
)


@pytest.fixture(scope="session")
def ex6():
    return example6_spec()


@pytest.fixture(scope="session")
def ex6_range():
    return EXAMPLE6_RANGE


@pytest.fixture(scope="session")
def ex6_overrides():
    return dict(EXAMPLE6_OVERRIDES)


@pytest.fixture(scope="session")
def const_spec():
    return constant_spec()


@pytest.fixture(scope="session")
def const_range():
    return CONSTANT_RANGE


@pytest.fixture(scope="session")
def ext_spec():
    return extinction_spec()


@pytest.fixture(scope="session")
def dec_spec():
    return decay_spec()


# --- acceptance reporting ------------------------------------------------------
# test_acceptance.py appends one line per criterion; they are echoed at the end
# of the run so they show up even when output capture is on.

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
