import json

import pytest

from intent_assure.report import FORMATS, emit_report, load_result, render_text


def test_text_report_is_byte_stable(golden_result):
    assert render_text(golden_result) == render_text(golden_result)


def test_text_report_contents(golden_result):
    text = emit_report(golden_result, "text")
    assert "| M1 = (get, domain, zone=West, kpi=availability)" in text
    assert "| E2 = (restart, collector_2, zone=West)" in text
    assert "| Health k_Hs       | 100%   | 50%            | -1          | 100%           |" in text
    assert "P=1x|-4|=4" in text and "P=2x|-4|=8" in text
    assert "| Number of generated policies | 12          | 4         |" in text
    assert "action downtime: 90 s (restart)" in text
    assert "latency" not in text


def test_json_round_trip(golden_result):
    text = emit_report(golden_result, "json")
    data = json.loads(text)
    assert len(data["fulfillment"]) == 12
    assert sum(len(e["policies"]) for e in data["assurance"]) == 4
    assert load_result(text) == golden_result


def test_unknown_format(golden_result):
    assert FORMATS == ("text", "json")
    with pytest.raises(ValueError):
        emit_report(golden_result, "yaml")
