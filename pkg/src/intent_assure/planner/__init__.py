"""Intent planners: a deterministic rule engine and a chat-model adapter."""

from __future__ import annotations

from pathlib import Path

from ..errors import ConfigurationError
from .core import (
    INTENT_TYPES,
    ActionCandidate,
    AssuranceBrief,
    FormalIntent,
    Incident,
    PlannerContext,
    ValidationReport,
    Violation,
    classify_intent,
    default_actions,
    extract_kpis,
    failure_kinds,
    formalize_intent,
    rank_actions,
    select_action,
    validate_tree,
)
from .llm import (
    HttpChatClient,
    LLMPlanner,
    RecordingChatClient,
    ReplayChatClient,
    ScriptedChatClient,
    TranscriptMismatch,
)
from .rules import RulePlanner

PLANNER_MODES = ("rules", "llm", "replay")


def make_planner(mode: str = "rules", transcript: str | Path | None = None, record: str | Path | None = None, client=None):
    """Build a planner for ``mode``.

    ``replay`` answers from ``transcript``; ``llm`` talks to the configured
    endpoint (or ``client``) and, with ``record``, writes a transcript.
    """
    if mode == "rules":
        return RulePlanner()
    if mode == "llm":
        inner = client if client is not None else HttpChatClient.from_env()
        if record is not None:
            inner = RecordingChatClient(inner, record)
        return LLMPlanner(inner)
    if mode == "replay":
        if transcript is None:
            raise ConfigurationError("replay mode needs a transcript file")
        planner = LLMPlanner(ReplayChatClient(transcript))
        planner.mode = "replay"
        return planner
    raise ConfigurationError(f"unknown planner mode {mode!r}; expected one of {PLANNER_MODES}")


__all__ = [
    "INTENT_TYPES",
    "PLANNER_MODES",
    "ActionCandidate",
    "AssuranceBrief",
    "FormalIntent",
    "HttpChatClient",
    "Incident",
    "LLMPlanner",
    "PlannerContext",
    "RecordingChatClient",
    "ReplayChatClient",
    "RulePlanner",
    "ScriptedChatClient",
    "TranscriptMismatch",
    "ValidationReport",
    "Violation",
    "classify_intent",
    "default_actions",
    "extract_kpis",
    "failure_kinds",
    "formalize_intent",
    "make_planner",
    "rank_actions",
    "select_action",
    "validate_tree",
]
