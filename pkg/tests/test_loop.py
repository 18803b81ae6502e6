import dataclasses

import pytest

from intent_assure.errors import IllegalTransition
from intent_assure.loop import (
    LEGAL_TRANSITIONS,
    LoopState,
    ScenarioResult,
    check_transition,
    run_scenario,
)
from intent_assure.scenario import load_scenario, parse_scenario

EXPECTED_FULFILLMENT = [
    "get", "get", "compliance", "avail", "create", "validate",
    "deploy", "configure", "start", "healthcheck", "schedule", "get",
]  # fmt: skip
EXPECTED_ASSURANCE = ["get", "restart", "validate", "start"]


def test_golden_run(golden_result):
    r = golden_result
    assert r.phase == "steady"
    assert [x["verb"] for x in r.fulfillment] == EXPECTED_FULFILLMENT
    assert [x["verb"] for x in r.assurance_policies()] == EXPECTED_ASSURANCE
    assert all(x["success"] for x in r.fulfillment + r.assurance_policies())
    episode = r.assurance[0]
    assert episode["resource"] == "collector_2" and episode["action"] == "restart"
    assert [(row["name"], row["penalty"]) for row in episode["ranking"]] == [("restart", 4.0), ("recreate", 8.0)]
    assert episode["gradient"] == -4.0
    assert (r.kpis["target"]["k_Hs_pct"], r.kpis["t1"]["k_Hs_pct"], r.kpis["t2"]["k_Hs_pct"]) == (100.0, 50.0, 100.0)
    assert r.kpis["t1"]["drift"]["gradient"] == {"k_Hs": -1.0, "k_As": 0.0}
    assert r.availability["t_down_s"] == 120.0
    assert r.availability["action_downtime_s"] == 90.0
    assert r.availability["intent_health"] == 1
    assert r.availability["availability"] >= 0.9999


def test_audit_chain_links_drift_to_policies(golden_result):
    episode = golden_result.assurance[0]
    assert episode["drift"]["kpis"] == ["k_Hs", "k_As"]
    for rec in episode["policies"]:
        assert rec["drift"] == episode["drift"]
    drifted = [d for d in golden_result.drift_trace if not d["is_zero_drift"]]
    assert len(drifted) == 1 and drifted[0]["time"] == episode["time"]


def test_transitions_follow_the_legal_graph(golden_result):
    phases = [tuple(t[:2]) for t in golden_result.transitions]
    assert phases == [
        ("fulfilling", "steady"),
        ("steady", "drift_detected"),
        ("drift_detected", "correcting"),
        ("correcting", "steady"),
    ]
    assert set(phases) <= LEGAL_TRANSITIONS


def test_illegal_transitions_raise():
    with pytest.raises(IllegalTransition):
        check_transition("steady", "correcting")
    with pytest.raises(IllegalTransition):
        check_transition("steady", "assured")
    state = LoopState()
    state.fail("boom", 5.0)
    assert state.phase == "failed" and state.diagnostic == "boom"


def test_no_faults_means_no_assurance():
    r = run_scenario(load_scenario("no-faults"))
    assert r.phase == "steady" and r.assurance == [] and r.availability["t_down_s"] == 0.0


def test_recreate_only_scenario():
    r = run_scenario(load_scenario("paper-usecase-recreate"))
    assert r.phase == "steady"
    assert r.assurance[0]["action"] == "recreate"
    assert r.availability["action_downtime_s"] == 200.0
    assert r.availability["availability"] >= 0.9999


def test_hardware_fault_escalates_from_restart_to_recreate():
    r = run_scenario(load_scenario("paper-usecase-hardware"))
    assert r.phase == "steady"
    verbs = [x["verb"] for x in r.assurance_policies()]
    assert verbs.count("restart") == 2 and "recreate" in verbs
    assert r.assurance[0]["action"] == "restart" and r.assurance[-1]["action"] == "recreate"


def _doc(**run):
    return {
        "intent": "Create collectors in Domain West for gathering Netflow data in the domain, "
        "such that the collectors have 99.99% availability",
        "zones": [{"name": "West", "inventory": {"small": 0, "medium": 0, "large": 0}}],
        "run": run,
    }


def test_empty_inventory_fails_during_fulfillment():
    r = run_scenario(parse_scenario(_doc(simulate_h=1)))
    assert r.phase == "failed"
    assert "no vm size with 2 free instances" in r.diagnostic
    assert r.availability["intent_health"] == 0
    assert r.assurance == []


@pytest.mark.parametrize("seed", range(40))
def test_seed_sweep_keeps_transitions_legal(seed):
    base = load_scenario("paper-usecase")
    target = "collector_1" if seed % 2 else "collector_2"
    kind = ["shutdown", "degrade", "hardware"][seed % 3]
    fault = {"target": target, "kind": kind, "anchor": "healthcheck", "index": 1 + seed % 4, "offset_s": -60 * (seed % 5 + 1)}
    if kind == "degrade":
        fault.update(metric="u_cpu", value=95.0)
    scenario = dataclasses.replace(base, simulate_h=8.0, faults=[fault])
    r = run_scenario(scenario, seed=seed)
    for old, new, _ in r.transitions:
        assert new == "failed" or (old, new) in LEGAL_TRANSITIONS
    times = [t[2] for t in r.transitions]
    assert times == sorted(times)
    assert r.phase in ("steady", "failed")


def test_result_dict_round_trip(golden_result):
    assert ScenarioResult.from_dict(golden_result.to_dict()) == golden_result
