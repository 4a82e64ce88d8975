import json
import math

import pytest

import renass


def single_component(reliability, substitute):
    components = [{"id": 0, "reliability": reliability}]
    rules = []
    if substitute:
        components.append({"id": 1, "reliability": reliability})
        rules = [{"failed": {"component": 0}, "substitutes": [{"component": 1}]}]
    return renass.Model.from_json(_document(components, rules, critical=substitute))


def _document(components, rules, critical):
    return json.dumps(
        {
            "format_version": 1,
            "components": components,
            "connectors": [],
            "services": [{"id": 0, "support": [{"component": 0}]}],
            "businesses": [{"id": 0, "critical": critical, "services": [0], "transition": [[1.0]]}],
            "reconfig": {"id": 0, "rules": rules},
        }
    )


def test_generate_default_scale():
    model = renass.generate()
    assert (model.components, model.connectors, model.services, model.businesses) == (306, 459, 40, 10)
    assert model.validate() == []


def test_round_trip(tmp_path):
    model = renass.generate(components=20, connectors=30, services=5, businesses=3, substitutes=1, seed=4)
    path = tmp_path / "model.json"
    model.save(path)
    assert renass.load(path) == model
    assert renass.Model.from_json(model.to_json()) == model


def test_run_series_and_counters():
    model = renass.generate(components=20, connectors=30, services=5, businesses=3, substitutes=1, reliability=0.99)
    trace = renass.run(model, ticks=100, seed=3)
    assert trace.ticks == 100
    assert len(trace.system) == 100
    assert all(0.0 <= a <= 1.0 for a in trace.system)
    for c in trace.counters:
        assert c["ot"] + c["st"] + c["tcm"] + c["tpm"] == 100
    assert renass.run(model, ticks=100, seed=3).system == trace.system


def test_perfect_reliability():
    model = renass.generate(components=20, connectors=30, services=5, businesses=3, substitutes=1)
    assert set(renass.run(model, ticks=50, reliability=1.0).system) == {1.0}


def test_compare_gap_is_non_negative():
    model = renass.generate(components=20, connectors=30, services=5, businesses=3, substitutes=1, reliability=0.99)
    report = renass.compare(model, ticks=200, seed=2)
    assert report["min_gap"] >= 0.0
    assert len(report["gap"]) == 200
    replicated = renass.compare(model, ticks=50, replications=4, threads=2)
    assert len(replicated["se_gap"]) == 50


def test_operational_availability():
    assert renass.operational_availability(6, 2, 1, 1) == pytest.approx(0.8)
    with pytest.raises(renass.UndefinedMetricError):
        renass.operational_availability(0, 0, 0, 0)


def test_oracles_on_hand_models():
    plain = single_component(0.5, False)
    backed = single_component(0.5, True)
    assert renass.exact_availability(plain, ticks=2) == pytest.approx(0.375)
    assert renass.exact_availability(backed, ticks=2) == pytest.approx(0.59375)
    assert renass.brute_force_availability(backed, ticks=2) == pytest.approx(0.59375)
    check = renass.oracle_check(plain, ticks=2, replications=20000, threads=0)
    assert check["oracle"] == pytest.approx(0.375)
    assert abs(check["z"]) <= 3 and check["passed"]


def test_errors_are_typed():
    with pytest.raises(renass.ParseError):
        renass.from_json("")
    with pytest.raises(renass.IoError):
        renass.load("/nonexistent/model.json")
    with pytest.raises(renass.ParamError):
        renass.run(renass.generate(components=20, connectors=30, services=5, businesses=3, substitutes=1), ticks=0)
    assert issubclass(renass.ValidationError, renass.Error)
    assert math.isfinite(renass.exact_availability(single_component(0.9, False), ticks=3))
