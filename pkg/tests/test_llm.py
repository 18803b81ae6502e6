import http.server
import json
import threading

import pytest

from intent_assure.errors import (
    ConfigurationError,
    FormalizationError,
    GenerationError,
    UnknownIntentType,
)
from intent_assure.loop import run_scenario
from intent_assure.planner import (
    HttpChatClient,
    LLMPlanner,
    PlannerContext,
    RecordingChatClient,
    ReplayChatClient,
    ScriptedChatClient,
    TranscriptMismatch,
    formalize_intent,
    make_planner,
)
from intent_assure.planner.llm import request_digest
from intent_assure.report import render_json
from intent_assure.scenario import load_scenario
from intent_assure.transcripts import record_rule_transcript

INTENT = "Create collectors in Domain West for gathering Netflow data in the domain, such that the collectors have 99.99% availability"


def _ctx():
    return PlannerContext(INTENT, formalize_intent(INTENT), "create_resource", None)


def test_reasks_after_an_unparseable_reply():
    client = ScriptedChatClient(["sure, here it is", "M1 = (get, domain, zone=West, kpi=availability)"])
    policy = LLMPlanner(client).next_policy(_ctx())
    assert policy.label == "M1"
    second = client.calls[1][1]
    assert second[-1]["role"] == "user" and "not a valid policy" in second[-1]["content"]


def test_gives_up_after_two_reasks():
    client = ScriptedChatClient(["nope", "still no", "never"])
    with pytest.raises(GenerationError):
        LLMPlanner(client).next_policy(_ctx())
    assert len(client.calls) == 3


def test_done_ends_the_tree_and_fences_are_stripped():
    assert LLMPlanner(ScriptedChatClient(["DONE"])).next_policy(_ctx()) is None
    planner = LLMPlanner(ScriptedChatClient(['```json\n{"Domain": "West"}\n```']))
    assert planner.formalize(INTENT).get("Domain") == "West"


def test_bad_formalization_and_classification():
    with pytest.raises(FormalizationError):
        LLMPlanner(ScriptedChatClient(["not json"])).formalize(INTENT)
    with pytest.raises(UnknownIntentType):
        LLMPlanner(ScriptedChatClient(["delete_everything"])).classify(INTENT)
    assert LLMPlanner(ScriptedChatClient(["create_resource."])).classify(INTENT) == "create_resource"


def test_recording_then_replay(tmp_path):
    path = tmp_path / "t.jsonl"
    rec = RecordingChatClient(ScriptedChatClient(["a", "b"]), path)
    m1 = [{"role": "user", "content": "one"}]
    m2 = [{"role": "user", "content": "two"}]
    rec.complete(m1, "generate")
    rec.complete(m2, "assure")
    entries = [json.loads(line) for line in path.read_text().splitlines()]
    assert entries[0] == {"profile": "generate", "request_sha256": request_digest(m1), "messages": m1, "response": "a"}

    replay = ReplayChatClient(path)
    assert replay.complete(m1, "generate") == "a"
    with pytest.raises(TranscriptMismatch):
        replay.complete(m1, "assure")
    with pytest.raises(TranscriptMismatch):
        replay.complete(m1, "generate")
    loose = ReplayChatClient(path, strict=False)
    loose.complete(m2, "generate")
    loose.complete(m1, "assure")
    with pytest.raises(TranscriptMismatch, match="exhausted"):
        loose.complete(m1, "assure")


def test_recorded_chat_run_matches_rules(tmp_path, golden_result):
    scenario = load_scenario("paper-usecase")
    path = tmp_path / "golden.jsonl"
    recorded = record_rule_transcript(scenario, path)
    replayed = run_scenario(scenario, planner=make_planner("replay", transcript=path))
    assert replayed.planner == "replay"
    for result in (recorded, replayed):
        assert [r["policy"] for r in result.fulfillment] == [r["policy"] for r in golden_result.fulfillment]
        assert [r["policy"] for r in result.assurance_policies()] == [
            r["policy"] for r in golden_result.assurance_policies()
        ]


def test_make_planner_modes():
    assert make_planner("rules").mode == "rules"
    with pytest.raises(ConfigurationError):
        make_planner("replay")
    with pytest.raises(ConfigurationError):
        make_planner("oracle")


class _Handler(http.server.BaseHTTPRequestHandler):
    seen: list = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _Handler.seen.append((self.headers.get("Authorization"), body))
        payload = json.dumps({"choices": [{"message": {"content": "DONE"}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


def test_http_client_against_a_local_server():
    server = http.server.HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        client = HttpChatClient(f"http://127.0.0.1:{server.server_port}/v1/chat/completions", "k3y", "m")
        assert client.complete([{"role": "user", "content": "hi"}], "generate") == "DONE"
    finally:
        server.shutdown()
    auth, body = _Handler.seen[-1]
    assert auth == "Bearer k3y"
    assert body["model"] == "m" and body["temperature"] == 0


def test_http_client_from_env(monkeypatch):
    monkeypatch.delenv("INTENT_ASSURE_LLM_ENDPOINT", raising=False)
    with pytest.raises(ConfigurationError):
        HttpChatClient.from_env()
    monkeypatch.setenv("INTENT_ASSURE_LLM_ENDPOINT", "http://localhost:1/x")
    assert HttpChatClient.from_env().endpoint == "http://localhost:1/x"


def test_bundled_transcript_replays_to_identical_json(golden_result):
    scenario = load_scenario("paper-usecase")
    replayed = run_scenario(scenario, planner=make_planner("replay", transcript=scenario.transcript))
    a = json.loads(render_json(replayed))
    b = json.loads(render_json(golden_result))
    a.pop("planner"), b.pop("planner")
    assert a == b
