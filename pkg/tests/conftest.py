from importlib import resources

import pytest

from ontoenrich.ontology import load_ontology
from ontoenrich.rdf_store import TripleStore

DATA = resources.files("ontoenrich").joinpath("data")
GEOGRAPHY_JSON = str(DATA.joinpath("geography.json"))
GEOGRAPHY_NT = str(DATA.joinpath("geography.nt"))

DBR = "http://dbpedia.org/resource/"
ORIGIN = "http://dbpedia.org/property/origin"


@pytest.fixture
def geo_ontology():
    return load_ontology(DATA.joinpath("geography.json").read_bytes())


@pytest.fixture(scope="session")
def geo_store():
    return TripleStore.from_ntriples(DATA.joinpath("geography.nt").read_bytes())


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
