import re

import pytest

from intent_assure.errors import ParseError, TreeError
from intent_assure.policy import (
    ExecutionFeedback,
    Policy,
    PolicyTree,
    Ref,
    as_fraction,
    as_int,
    feedback_json,
    parse_policy,
    render_feedback,
)

CREATE = "E1 = (create, vm, zone=West, count=2, size=small, name=[collector_1, collector_2], image=ubuntu)"


def test_parse_create_policy():
    p = parse_policy(CREATE)
    assert (p.label, p.verb, p.subject, p.klass) == ("E1", "create", "vm", "execute")
    assert p.param("name") == ("collector_1", "collector_2")
    assert p.param("count") == "2"
    assert str(p) == CREATE


def test_bare_label_is_a_reference():
    p = parse_policy("E7 = (schedule, E6, frequency=hourly)")
    assert p.subject == Ref("E6")
    assert p.refs() == ["E6"]
    conf = parse_policy("E4 = (configure, [collector_1, collector_2], service=service_netflow, source=M2, zone=West)")
    assert conf.param("source") == Ref("M2")


def test_whitespace_is_normalized():
    p = parse_policy("  E2=(validate,[collector_1,collector_2] ,zone = West)  ")
    assert str(p) == "E2 = (validate, [collector_1, collector_2], zone=West)"


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("X1 = (frobnicate, vm)", "unknown verb"),
        ("Q1 = (get, vm)", "bad policy label"),
        ("M1 = (get, domain, zone=West", "expected ')'"),
        ("M1 = (get, domain, zone=West, zone=East)", "duplicate parameter"),
        ("M1 = (get, domain) trailing", "trailing text"),
        ("M1 (get, domain)", "expected '='"),
    ],
)
def test_parse_errors_carry_a_position(text, fragment):
    with pytest.raises(ParseError, match=re.escape(fragment)) as err:
        parse_policy(text)
    assert "at position" in str(err.value)
    assert 0 <= err.value.position <= len(text)


def test_json_round_trip_keeps_refs():
    p = parse_policy("E7 = (schedule, E6, frequency=hourly)")
    data = p.to_json()
    assert data["subject"] == {"ref": "E6"}
    assert Policy.from_json(data) == p


def test_tree_rejects_forward_refs_and_duplicates():
    tree = PolicyTree()
    tree.append(parse_policy("M2 = (get, switch, zone=West)"))
    with pytest.raises(TreeError):
        tree.append(parse_policy("E7 = (schedule, E6, frequency=hourly)"))
    with pytest.raises(TreeError):
        tree.append(parse_policy("M2 = (get, switch, zone=East)"))
    with pytest.raises(TreeError):
        PolicyTree("tidying")


def test_tree_text_round_trip():
    text = "M2 = (get, switch, zone=West)\nE4 = (configure, [c_1], service=s, source=M2, zone=West)"
    tree = PolicyTree.from_text(text)
    assert tree.to_text() == text
    assert PolicyTree.from_json(tree.to_json()).to_text() == text
    assert tree.labels() == ["M2", "E4"] and tree.verbs() == ["get", "configure"]


def test_feedback_rendering_matches_table_layout():
    fb = ExecutionFeedback(True, {"type": "vm", "count": 2})
    assert render_feedback(fb) == "True, {type: vm, count: 2}"
    assert str(ExecutionFeedback(True, [{}, {}])) == "True, [{},{}]"
    assert str(ExecutionFeedback(True, {"switch": ["sw_1", "sw_2"]})) == "True, {switch: [sw_1, sw_2]}"
    assert feedback_json(fb) == '{"success": true, "state": {"type": "vm", "count": 2}}'


def test_value_coercion():
    assert as_fraction("99.99") == 0.9999
    assert as_fraction("99.99%") == 0.9999
    assert as_fraction("0.9999") == 0.9999
    assert as_int("2") == 2
    with pytest.raises(ValueError):
        as_int(("1", "2"))
    with pytest.raises(ValueError):
        as_fraction("lots")
