"""Chat-completion backed planner plus transcript record/replay clients.

The HTTP client speaks the common ``/chat/completions`` JSON shape. It is
configured from the environment:

``INTENT_ASSURE_LLM_ENDPOINT``  full URL of the completions endpoint
``INTENT_ASSURE_LLM_API_KEY``   bearer credential (optional)
``INTENT_ASSURE_LLM_MODEL``     model name sent in the request body
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import urllib.request
from collections.abc import Sequence
from importlib import resources
from pathlib import Path
from typing import Protocol

from ..errors import (
    AssuranceError,
    ConfigurationError,
    FormalizationError,
    GenerationError,
    ParseError,
    PlanningAborted,
    UnknownIntentType,
)
from ..kpi import KpiVector
from ..policy import Policy, PolicyTree, parse_policy
from .core import (
    INTENT_TYPES,
    ActionCandidate,
    FormalIntent,
    Incident,
    PlannerContext,
    ValidationReport,
    Violation,
    extract_kpis,
    select_action,
    validate_tree,
)

PROFILES = ("formalize", "classify", "generate", "validate", "assure")
MAX_REASKS = 2

Messages = list[dict[str, str]]


class ChatClient(Protocol):
    def complete(self, messages: Messages, profile: str) -> str: ...


class TranscriptMismatch(AssuranceError):
    """A replayed request differs from the recorded one."""


def load_prompt(profile: str) -> str:
    return resources.files("intent_assure.prompts").joinpath(f"{profile}.txt").read_text(encoding="utf-8")


def request_digest(messages: Messages) -> str:
    blob = json.dumps(messages, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class HttpChatClient:
    def __init__(self, endpoint: str, api_key: str | None = None, model: str = "gpt-4", timeout: float = 60.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.timeout = timeout
        self.latency: list[float] = []

    @classmethod
    def from_env(cls, timeout: float = 60.0) -> HttpChatClient:
        endpoint = os.environ.get("INTENT_ASSURE_LLM_ENDPOINT")
        if not endpoint:
            raise ConfigurationError("INTENT_ASSURE_LLM_ENDPOINT is not set")
        return cls(
            endpoint,
            os.environ.get("INTENT_ASSURE_LLM_API_KEY"),
            os.environ.get("INTENT_ASSURE_LLM_MODEL", "gpt-4"),
            timeout,
        )

    def complete(self, messages: Messages, profile: str) -> str:
        body = json.dumps({"model": self.model, "messages": messages, "temperature": 0}).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=body, headers=headers, method="POST")
        started = time.perf_counter()
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
        self.latency.append(time.perf_counter() - started)
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GenerationError(f"malformed completion payload: {payload!r}") from exc


class RecordingChatClient:
    """Wraps a client and appends every exchange to a JSONL transcript."""

    def __init__(self, inner: ChatClient, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self.path.write_text("", encoding="utf-8")

    def complete(self, messages: Messages, profile: str) -> str:
        response = self.inner.complete(messages, profile)
        entry = {"profile": profile, "request_sha256": request_digest(messages), "messages": messages, "response": response}
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        return response


class ReplayChatClient:
    """Answers from a recorded transcript, in order, without touching the network."""

    def __init__(self, path: str | Path, strict: bool = True):
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        self.entries = [json.loads(ln) for ln in lines if ln.strip()]
        self.strict = strict
        self.cursor = 0

    def complete(self, messages: Messages, profile: str) -> str:
        if self.cursor >= len(self.entries):
            raise TranscriptMismatch(f"transcript exhausted after {self.cursor} exchanges")
        entry = self.entries[self.cursor]
        if entry["profile"] != profile:
            raise TranscriptMismatch(f"exchange {self.cursor}: expected profile {entry['profile']}, got {profile}")
        if self.strict and entry["request_sha256"] != request_digest(messages):
            raise TranscriptMismatch(f"exchange {self.cursor}: request differs from the recorded one")
        self.cursor += 1
        return entry["response"]


class ScriptedChatClient:
    """Returns canned responses in order; for tests and transcript authoring."""

    def __init__(self, responses: Sequence[str]):
        self.responses = list(responses)
        self.calls: list[tuple[str, Messages]] = []

    def complete(self, messages: Messages, profile: str) -> str:
        self.calls.append((profile, messages))
        if not self.responses:
            raise GenerationError("scripted client ran out of responses")
        return self.responses.pop(0)


def _strip(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        text = text.strip("`")
        text = text.split("\n", 1)[1] if "\n" in text else text
    return text.strip()


class LLMPlanner:
    """Planner whose decisions come from a chat model, one exchange per step."""

    mode = "llm"

    def __init__(self, client: ChatClient):
        self.client = client
        self.prompts = {p: load_prompt(p) for p in PROFILES}

    def _ask(self, profile: str, user: str, extra: Messages = ()) -> str:
        messages = [{"role": "system", "content": self.prompts[profile]}, {"role": "user", "content": user}, *extra]
        return self.client.complete(messages, profile)

    def formalize(self, text: str) -> FormalIntent:
        if not text or not text.strip():
            raise FormalizationError("intent text is empty", text or "")
        raw = self._ask("formalize", f"Intent: {text}\nFormal:")
        try:
            data = json.loads(_strip(raw))
            if not isinstance(data, dict):
                raise ValueError("not an object")
            return FormalIntent(tuple((str(k), str(v)) for k, v in data.items()), text)
        except ValueError as exc:
            raise FormalizationError(f"unparseable formalization: {exc}", raw) from exc

    def classify(self, text: str) -> str:
        raw = _strip(self._ask("classify", f"Intent: {text}\nLabel:"))
        label = raw.split()[0].strip(".,") if raw else ""
        if label not in INTENT_TYPES:
            raise UnknownIntentType(f"model answered {raw!r}")
        return label

    def extract_kpis(self, intent: FormalIntent) -> KpiVector:
        return extract_kpis(intent)

    def select_action(self, candidates: Sequence[ActionCandidate], incident: Incident) -> ActionCandidate:
        return select_action(candidates, incident)

    def validate(self, tree: PolicyTree, intent: FormalIntent, intent_type: str) -> ValidationReport:
        report = validate_tree(tree, intent, intent_type)
        user = (
            f"Intent: {intent.source}\nType: {intent_type}\nFormal: {json.dumps(intent.as_dict())}\n"
            f"Tree:\n{tree.to_text()}"
        )
        raw = self._ask("validate", user)
        try:
            findings = json.loads(_strip(raw)).get("violations", [])
        except (ValueError, AttributeError):
            findings = [{"kind": "attribute", "label": "", "message": f"validator reply unparseable: {raw[:80]}"}]
        for f in findings:
            v = Violation(str(f.get("kind", "attribute")), str(f.get("label", "")), str(f.get("message", "")))
            if v not in report.violations:
                report.violations.append(v)
        return report

    def _render(self, ctx: PlannerContext) -> str:
        lines = [f"Intent: {ctx.intent_text}", f"Type: {ctx.intent_type}", f"Formal: {json.dumps(ctx.formal.as_dict())}"]
        if ctx.phase == "assurance" and ctx.brief is not None:
            b = ctx.brief
            lines += [
                f"Target data: {json.dumps(b.target_data, sort_keys=True)}",
                f"Operational data: {json.dumps(b.operational_data, sort_keys=True)}",
                f"Selected action: {b.action.name} on {b.incident.resource} (zone {b.incident.zone})",
            ]
        lines.append("History:")
        lines.append(ctx.render_history() or "(none)")
        lines.append("Next policy:")
        return "\n".join(lines)

    def next_policy(self, ctx: PlannerContext) -> Policy | None:
        if ctx.history:
            last, fb = ctx.history[-1]
            if not fb.success and (last.label[0] != "E" or ctx.attempts(last.label) >= 2):
                raise PlanningAborted(f"{last} failed: {fb}")
        profile = "assure" if ctx.phase == "assurance" else "generate"
        user = self._render(ctx)
        extra: Messages = []
        for _ in range(MAX_REASKS + 1):
            raw = _strip(self._ask(profile, user, extra))
            if raw.upper() == "DONE":
                return None
            try:
                return parse_policy(raw.splitlines()[0] if raw else raw)
            except ParseError as exc:
                extra = extra + [
                    {"role": "assistant", "content": raw},
                    {"role": "user", "content": f"That is not a valid policy ({exc}). Reply with one policy or DONE."},
                ]
        raise GenerationError(f"no valid policy after {MAX_REASKS} re-asks; last reply {raw!r}")
