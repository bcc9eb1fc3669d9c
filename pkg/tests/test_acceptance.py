"""Acceptance criteria on the bundled telephone fixture.

Each test prints one PASS/FAIL line in the "acceptance criteria" summary
section at the end of the pytest run.
"""

import math

import pytest

from ucm_importance.cli import RunConfig, cmd_analyze, cmd_simulate
from ucm_importance.fixtures import fixture_file
from ucm_importance.importance import build_report, filter_alternative, filter_overall, scenario_importance
from ucm_importance.scenarios import enumerate_scenarios, path_signature, resolve_scenario
from ucm_importance.simulate import estimate
from ucm_importance.usage import build_flat_chain, check_stochastic, enumerate_paths

from conftest import EXPECTED_SCENARIOS, EXPECTED_PRIMITIVES, TOL
from randmodels import random_model, random_object_model

CONTAINERS = {
    "default_originating": 1.2,
    "ocs": 1.32,
    "terminating": 4.928,
    "SO": 2.52,
    "ST": 4.928,
    "AgentT": 4.928,
    "UserT": 0.704,
}
RANDOM_SEEDS = range(50)


def test_1_scenario_importance(acceptance, report):
    acceptance("1 scenario importances equal 0.48/0.12/0.12/0.224/0.056 and sum to 1")
    assert dict(report.scenario_importance) == pytest.approx(EXPECTED_SCENARIOS, abs=TOL)
    assert math.fsum(report.scenario_importance.values()) == pytest.approx(1.0, abs=TOL)


def test_2_thresholds(acceptance, report, paths):
    acceptance("2 overall threshold 0.2 and alternative threshold 0.3 select the expected scenarios")
    overall = filter_overall(report, 0.2)
    assert {n: report.scenario_importance[n] for n in overall} == pytest.approx(
        {"NormalIdleCall": 0.48, "OCSAllowedIdleCall": 0.224}, abs=TOL
    )
    assert set(filter_alternative(paths, 0.3)) == {"NormalIdleCall", "OCSDeniedCall", "OCSAllowedIdleCall"}
    assert len(filter_alternative(paths, 0.3)) == 3


def test_3_primitive_importance(acceptance, report):
    acceptance("3 all 17 primitive object importances reproduced")
    assert len(EXPECTED_PRIMITIVES) == 17
    assert {o: report.object_importance[o] for o in EXPECTED_PRIMITIVES} == pytest.approx(EXPECTED_PRIMITIVES, abs=TOL)


def test_4_container_importance(acceptance, report):
    acceptance("4 plug-in, stub and component importances reproduced")
    assert {o: report.object_importance[o] for o in CONTAINERS} == pytest.approx(CONTAINERS, abs=TOL)


def test_4b_percent_by_type(acceptance, report):
    acceptance("4b percent share of req equals 100/10.152")
    assert report.percents["responsibility"]["req"] == pytest.approx(100.0 / 10.152, rel=1e-6)


def test_5_monte_carlo_oracle(acceptance, chain, paths):
    acceptance("5 100000 seeded walks match scenario and visit values within 0.01")
    names = {path_signature(p, chain): p.name for p in paths}
    est = estimate(chain, 100_000, seed=2024)
    freqs = {names[sig]: f for sig, f in est.frequencies.items()}
    assert freqs == pytest.approx(EXPECTED_SCENARIOS, abs=0.01)
    assert {o: est.mean_visits[o] for o in EXPECTED_PRIMITIVES} == pytest.approx(EXPECTED_PRIMITIVES, abs=0.01)


def test_6a_stochastic_random_models(acceptance):
    acceptance("6a flattened chains of 50 random models are stochastic")
    for seed in RANDOM_SEEDS:
        report = check_stochastic(build_flat_chain(random_model(seed)))
        assert report.ok, (seed, str(report))


def test_6b_path_mass(acceptance):
    acceptance("6b path mass is 1 and equals summed scenario importance on random models")
    for seed in RANDOM_SEEDS:
        model = random_model(seed)
        chain = build_flat_chain(model)
        mass = math.fsum(p.mass for p in enumerate_paths(chain))
        total = math.fsum(
            scenario_importance(resolve_scenario(d, chain)) for d in enumerate_scenarios(model, chain)
        )
        assert mass == pytest.approx(1.0, abs=TOL), seed
        assert total == pytest.approx(mass, abs=TOL), seed


def test_6c_tree_sum(acceptance):
    acceptance("6c container importance equals the sum over its containment subtree")
    for seed in RANDOM_SEEDS:
        model = random_model(seed)
        objects = random_object_model(model, seed + 1)
        chain = build_flat_chain(model)
        paths = [resolve_scenario(d, chain) for d in enumerate_scenarios(model, chain)]
        values = build_report(paths, objects).object_importance
        for obj, value in values.items():
            if objects.is_container(obj):
                assert value == sum(values[c] for c in objects.children(obj))
                leaves = [d for d in objects.descendants(obj) if not objects.is_container(d)]
                assert value == pytest.approx(math.fsum(values[d] for d in leaves), rel=1e-9, abs=1e-12)


def test_6d_threshold_monotone(acceptance, report, paths):
    acceptance("6d raising a threshold never adds scenarios")
    grid = [i / 100 for i in range(101)]
    for lo, hi in zip(grid, grid[1:]):
        assert set(filter_overall(report, hi)) <= set(filter_overall(report, lo))
        assert set(filter_alternative(paths, hi)) <= set(filter_alternative(paths, lo))


def test_6e_enumeration(acceptance, telephone, chain):
    acceptance("6e automatic enumeration finds exactly the 5 telephone scenarios")
    found = enumerate_scenarios(telephone, chain)
    assert len(found) == 5
    values = sorted(scenario_importance(resolve_scenario(d, chain)) for d in found)
    assert values == pytest.approx(sorted(EXPECTED_SCENARIOS.values()), abs=TOL)


def test_7_determinism(acceptance):
    acceptance("7 analyze and simulate output is byte-identical across runs")
    analyze = RunConfig(
        model=fixture_file("model"), scenarios=fixture_file("scenarios"), objects=fixture_file("objects"),
        overall_threshold=0.2, alt_threshold=0.3,
    )
    simulate = RunConfig(model=fixture_file("model"), scenarios=fixture_file("scenarios"), walks=5000, seed=17)
    for fmt in ("text", "json", "csv"):
        a = RunConfig(**{**vars(analyze), "format": fmt})
        s = RunConfig(**{**vars(simulate), "format": fmt})
        assert cmd_analyze(a).encode() == cmd_analyze(a).encode()
        assert cmd_simulate(s).encode() == cmd_simulate(s).encode()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
