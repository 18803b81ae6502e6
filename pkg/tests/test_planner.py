import warnings

import pytest

from intent_assure.errors import EscalationError, FormalizationError, UnknownIntentType
from intent_assure.planner import (
    ActionCandidate,
    Incident,
    PlannerContext,
    RulePlanner,
    classify_intent,
    default_actions,
    extract_kpis,
    formalize_intent,
    rank_actions,
    select_action,
    validate_tree,
)
from intent_assure.policy import ExecutionFeedback, PolicyTree

INTENT = (
    "Create collectors in Domain West for gathering Netflow data in the domain, "
    "such that the collectors have 99.99% availability"
)


def test_formalize_worked_example():
    f = formalize_intent(INTENT)
    assert f.as_dict() == {"Domain": "West", "Task": "Create collectors", "Data Type": "Netflow", "Availability": "99.99%"}
    assert formalize_intent(INTENT.replace("West", "East")).get("domain") == "East"
    with pytest.raises(FormalizationError):
        formalize_intent("")


def test_kpi_extraction():
    assert extract_kpis(formalize_intent(INTENT)).as_dict() == {"Availability": 0.9999}
    assert extract_kpis(formalize_intent("Create collectors in West with availability 99.9%")).as_dict() == {
        "Availability": 0.999
    }
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert len(extract_kpis(formalize_intent("Create collectors in Domain West"))) == 0
    assert caught


def test_classification():
    assert classify_intent(INTENT) == "create_resource"
    assert classify_intent("discover all switches in West") == "discover_resource"
    assert classify_intent("deploy the netflow service") == "deploy_service"
    with pytest.raises(UnknownIntentType):
        classify_intent("blorp zzz")


def _ctx():
    f = formalize_intent(INTENT)
    return PlannerContext(INTENT, f, "create_resource", extract_kpis(f))


def test_first_policy_and_parameterized_create():
    planner = RulePlanner()
    ctx = _ctx()
    first = planner.next_policy(ctx)
    assert str(first) == "M1 = (get, domain, zone=West, kpi=availability)"
    feeds = {
        "M1": {"zone": "West", "availability": "99.9%"},
        "M2": {"zone": "West", "switch": ["sw_1"]},
        "A1": {"type": "vm", "count": 2},
        "A2": [{"size": "small", "count": 50}, {"size": "medium", "count": 20}],
    }
    policy = first
    for label in ("M1", "M2", "A1", "A2"):
        ctx.record(policy, ExecutionFeedback(True, feeds[label]))
        policy = planner.next_policy(ctx)
    assert str(policy) == (
        "E1 = (create, vm, zone=West, count=2, size=small, name=[collector_1, collector_2], image=ubuntu)"
    )


def test_validation_findings():
    good = PolicyTree.from_text(
        "\n".join(
            [
                "M2 = (get, switch, zone=West)",
                "A1 = (compliance, domain, zone=West, availability=99.99, type=vm)",
                "A2 = (avail, vm, zone=West, count=2)",
                "E1 = (create, vm, zone=West, count=2, size=small, name=[c_1, c_2])",
                "E2 = (validate, [c_1, c_2], zone=West)",
                "E3 = (deploy, [c_1, c_2], service=collector, name=s)",
                "E4 = (configure, [c_1, c_2], service=s, source=M2, zone=West)",
                "E5 = (start, [c_1, c_2], service=s, zone=West)",
                "E6 = (healthcheck, s, output=App_1)",
                "E7 = (schedule, E6, frequency=hourly)",
            ]
        )
    )
    f = formalize_intent(INTENT)
    assert validate_tree(good, f, "create_resource").ok
    swapped = PolicyTree.from_text(good.to_text().replace("E2 = (validate", "E9 = (validate").replace("\nE9", "\nE9"))
    lines = good.to_text().splitlines()
    reordered = PolicyTree.from_text("\n".join(lines[:4] + [lines[5], lines[4]] + lines[6:]))
    assert "sequence" in validate_tree(reordered, f, "create_resource").kinds()
    east = PolicyTree.from_text(good.to_text().replace("zone=West", "zone=East"))
    assert "attribute" in validate_tree(east, f, "create_resource").kinds()
    assert swapped is not None
    missing = PolicyTree.from_text("\n".join(lines[:4]))
    assert "omission" in validate_tree(missing, f, "create_resource").kinds()


def _incident(kinds=("resource_status",), gradient=-4.0):
    return Incident("collector_2", "service_netflow", "West", frozenset(kinds), gradient)


def test_penalties_pick_restart():
    inc = _incident()
    ranking = rank_actions(default_actions(), inc)
    assert [(r["name"], r["penalty"]) for r in ranking] == [("restart", 4.0), ("recreate", 8.0)]
    assert select_action(default_actions(), inc).name == "restart"


def test_failed_restart_escalates_to_recreate():
    inc = _incident()
    inc.failed_actions.add("restart")
    assert select_action(default_actions(), inc).name == "recreate"
    inc.failed_actions.add("recreate")
    with pytest.raises(EscalationError):
        select_action(default_actions(), inc)


def test_link_failure_needs_recreate():
    assert select_action(default_actions(), _incident(("link",))).name == "recreate"


def test_single_candidate_and_weights():
    only = [ActionCandidate("recreate", 3.0)]
    assert select_action(only, _incident()).name == "recreate"
    with pytest.raises(ValueError):
        ActionCandidate("restart", 0.0)
