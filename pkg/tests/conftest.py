import pytest

from srauth import presets
from srauth.ingest import load_session, load_workflow


@pytest.fixture(scope="session")
def catalog():
    return presets.catalog()


@pytest.fixture(scope="session")
def methods(catalog):
    return {m.id: m for m in catalog}


@pytest.fixture(scope="session")
def profiles():
    return presets.profiles()


@pytest.fixture(scope="session")
def fixtures(catalog):
    """session id -> (session, workflow) for every shipped fixture."""
    wfs = {}
    for p in sorted(presets.FIXTURE_WORKFLOWS.glob("*.json")):
        w = load_workflow(p, catalog)
        wfs[w.id] = w
    out = {}
    for p in sorted(presets.FIXTURE_SESSIONS.glob("*.json")):
        s = load_session(p)
        out[s.id] = (s, wfs[s.workflow])
    return out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
