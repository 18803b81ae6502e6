"""Author chat transcripts whose answers mirror the rule planner.

A transcript recorded this way lets the chat-model code path run end to end
without a network: replaying it reproduces the rule-based run policy for
policy.
"""

from __future__ import annotations

import json
from pathlib import Path

from .loop import ScenarioResult, run_scenario
from .planner import LLMPlanner, RecordingChatClient, RulePlanner, ScriptedChatClient


def scripted_responses(result: ScenarioResult) -> list[str]:
    """Model replies that would drive the chat planner through ``result``."""
    replies = [json.dumps(result.formal), result.intent_type]
    replies += [r["policy"] for r in result.fulfillment]
    if result.phase == "failed" and not result.assurance and not result.validation.get("ok"):
        return replies
    replies += ["DONE", json.dumps({"violations": []})]
    for episode in result.assurance:
        replies += [r["policy"] for r in episode["policies"]]
        if episode["completed"]:
            replies.append("DONE")
    return replies


def record_rule_transcript(scenario, path: str | Path, seed: int | None = None) -> ScenarioResult:
    """Run ``scenario`` with the rule planner, then re-run it through the chat planner while recording."""
    reference = run_scenario(scenario, seed=seed, planner=RulePlanner())
    client = RecordingChatClient(ScriptedChatClient(scripted_responses(reference)), path)
    return run_scenario(scenario, seed=seed, planner=LLMPlanner(client))
