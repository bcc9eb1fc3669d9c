from __future__ import annotations

import copy
import json

import pytest

from ucm_importance.fixtures import fixture_file
from ucm_importance.importance import build_report
from ucm_importance.ingest import load_model, load_object_model, load_scenarios, parse_model
from ucm_importance.scenarios import resolve_scenario
from ucm_importance.usage import build_flat_chain

# reference scenario importances of the telephone fixture
EXPECTED_SCENARIOS = {
    "NormalIdleCall": 0.48,
    "NormalBusyCall": 0.12,
    "OCSDeniedCall": 0.12,
    "OCSAllowedIdleCall": 0.224,
    "OCSAllowedBusyCall": 0.056,
}

# reference primitive object importances of the telephone fixture
EXPECTED_PRIMITIVES = {
    "req": 1.0,
    "msg": 1.0,
    "vrfy": 0.88,
    "out4": 0.88,
    "in2": 0.88,
    "upd": 0.704,
    "ring": 0.704,
    "out3": 0.704,
    "mrb": 0.704,
    "default_out1": 0.6,
    "default_in1": 0.6,
    "ocs_in1": 0.4,
    "chk": 0.4,
    "ocs_out1": 0.28,
    "mb": 0.176,
    "out2": 0.12,
    "md": 0.12,
}

TOL = 1e-9


@pytest.fixture(scope="session")
def telephone_data() -> dict:
    return json.loads(fixture_file("model").read_text(encoding="utf-8"))


@pytest.fixture
def telephone_copy(telephone_data) -> dict:
    return copy.deepcopy(telephone_data)


@pytest.fixture(scope="session")
def telephone():
    return load_model(fixture_file("model"))


@pytest.fixture(scope="session")
def objects(telephone):
    return load_object_model(fixture_file("objects"), telephone)


@pytest.fixture(scope="session")
def chain(telephone):
    return build_flat_chain(telephone)


@pytest.fixture(scope="session")
def definitions(telephone):
    return load_scenarios(fixture_file("scenarios"), telephone)


@pytest.fixture(scope="session")
def paths(definitions, chain):
    return [resolve_scenario(d, chain) for d in definitions]


@pytest.fixture(scope="session")
def report(paths, objects):
    return build_report(paths, objects)


def model_from(data: dict):
    return parse_model(json.dumps(data))


def single_map(nodes, edges, variables=(), components=()):
    """Model data with one root map."""
    return {
        "maps": [{"name": "root", "root": True, "nodes": list(nodes), "edges": list(edges)}],
        "components": [{"name": c} for c in components],
        "variables": list(variables),
    }


def find_map(data: dict, name: str) -> dict:
    return next(m for m in data["maps"] if m["name"] == name)


def find_edge(m: dict, src: str, dst: str) -> dict:
    return next(e for e in m["edges"] if e["from"] == src and e["to"] == dst)


# --- acceptance reporting ---------------------------------------------------

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    class Recorder:
        def __init__(self):
            self.label = None

        def __call__(self, label: str):
            self.label = label
            return self

    rec = Recorder()
    yield rec
    failed = getattr(request.node, "rep_call", None)
    ok = failed is not None and failed.passed
    lines.append(f"{'PASS' if ok else 'FAIL'}  {rec.label or request.node.name}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
