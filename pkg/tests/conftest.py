from __future__ import annotations

from importlib import resources

import pytest

from posauction.io import InstanceDocument, parse_document

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def load_fixture(name: str) -> InstanceDocument:
    text = resources.files("posauction").joinpath("fixtures", f"{name}.json").read_text()
    return parse_document(text)


# bidder letters in the fixtures
A, B, C, D, E = 1, 2, 3, 4, 5


@pytest.fixture
def example1() -> InstanceDocument:
    return load_fixture("topdown_example1")


@pytest.fixture
def example2() -> InstanceDocument:
    return load_fixture("topdown_example2")


@pytest.fixture
def divergence() -> InstanceDocument:
    return load_fixture("divergence")


@pytest.fixture
def ranges() -> InstanceDocument:
    return load_fixture("ranges")


@pytest.fixture
def general() -> InstanceDocument:
    return load_fixture("general_bids")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
