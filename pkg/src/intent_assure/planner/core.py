"""Intent understanding, tree validation and corrective-action selection.

These pieces are shared by the rule-based and the chat-model planners.
"""

from __future__ import annotations

import re
import warnings
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from ..drift import DriftReport
from ..errors import EscalationError, FormalizationError, UnknownIntentType
from ..health import SubServiceHealth
from ..kpi import KpiValue, KpiVector, Unit
from ..policy import ExecutionFeedback, Policy, PolicyTree, as_fraction, as_int, as_list

INTENT_TYPES = ("create_resource", "deploy_service", "discover_resource")

# first match wins
_TYPE_RULES = (
    ("discover_resource", re.compile(r"\b(discover|list|find|show)\b", re.IGNORECASE)),
    ("create_resource", re.compile(r"\bcreate\b", re.IGNORECASE)),
    ("deploy_service", re.compile(r"\b(deploy|install)\b", re.IGNORECASE)),
)

KPI_KEYS = {"availability": Unit.FRACTION, "health": Unit.FRACTION}


@dataclass(frozen=True)
class FormalIntent:
    """Ordered key:value view of an intent."""

    fields: tuple[tuple[str, str], ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if not self.fields:
            raise FormalizationError("formal intent is empty", self.source)
        keys = [k for k, _ in self.fields]
        if len(set(keys)) != len(keys):
            raise FormalizationError(f"duplicate keys in formal intent: {keys}", self.source)

    def get(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.fields:
            if k.lower() == key.lower():
                return v
        return default

    def as_dict(self) -> dict[str, str]:
        return dict(self.fields)


_TASK = re.compile(r"^\s*(create|deploy|discover)\s+(?:all\s+)?(\w+)", re.IGNORECASE)
_DOMAIN = re.compile(r"\b(?:domain|zone)\s+([A-Z][\w-]*)", re.IGNORECASE)
_IN_PLACE = re.compile(r"\bin\s+([A-Z][\w-]*)\b")
_DATA_TYPE = re.compile(r"\bgathering\s+(\w+)\s+data\b", re.IGNORECASE)
_AVAILABILITY = re.compile(r"(\d+(?:\.\d+)?\s*%)\s*availability|availability\s+(?:of\s+)?(\d+(?:\.\d+)?\s*%)", re.IGNORECASE)


def formalize_intent(text: str) -> FormalIntent:
    """Pattern-based formalization for the supported intent family."""
    if not text or not text.strip():
        raise FormalizationError("intent text is empty", text or "")
    task = _TASK.search(text)
    if task is None:
        raise FormalizationError("no recognisable task (create/deploy/discover ...)", text)
    fields = []
    domain = _DOMAIN.search(text) or _IN_PLACE.search(text)
    if domain:
        fields.append(("Domain", domain.group(1)))
    fields.append(("Task", f"{task.group(1).capitalize()} {task.group(2)}"))
    data = _DATA_TYPE.search(text)
    if data:
        fields.append(("Data Type", data.group(1)))
    avail = _AVAILABILITY.search(text)
    if avail:
        fields.append(("Availability", (avail.group(1) or avail.group(2)).replace(" ", "")))
    return FormalIntent(tuple(fields), text)


def extract_kpis(intent: FormalIntent) -> KpiVector:
    """Numeric objectives of a formal intent as a target vector (percentages become fractions)."""
    entries = []
    for key, value in intent.fields:
        unit = KPI_KEYS.get(key.lower())
        if unit is None:
            continue
        try:
            entries.append(KpiValue(key, as_fraction(value), unit))
        except ValueError:
            continue
    if not entries:
        warnings.warn(f"no KPI found in formal intent {intent.as_dict()}", stacklevel=2)
    return KpiVector(tuple(entries), "target")


def classify_intent(text: str) -> str:
    if not text or not text.strip():
        raise UnknownIntentType("empty intent")
    for label, pattern in _TYPE_RULES:
        if pattern.search(text):
            return label
    raise UnknownIntentType(f"no intent type matches {text!r}")


def service_stem(intent: FormalIntent) -> str:
    """'Create collectors' -> 'collector'."""
    task = intent.get("Task", "") or ""
    noun = task.split()[-1].lower() if task.split() else "resource"
    return noun[:-1] if noun.endswith("s") and len(noun) > 1 else noun


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    kind: str  # omission | sequence | dependency | attribute
    label: str
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "label": self.label, "message": self.message}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


REQUIRED_VERBS = {
    "create_resource": ("get", "compliance", "avail", "create", "validate", "deploy", "configure", "start", "healthcheck", "schedule"),
    "deploy_service": ("get", "compliance", "avail", "create", "validate", "deploy", "configure", "start", "healthcheck", "schedule"),
    "discover_resource": ("get",),
}

# (earlier, later): a tree that uses `later` must use `earlier` before it
SEQUENCE_RULES = (
    ("compliance", "create"),
    ("create", "validate"),
    ("validate", "deploy"),
    ("deploy", "configure"),
    ("configure", "start"),
    ("healthcheck", "schedule"),
)


def validate_tree(tree: PolicyTree, intent: FormalIntent, intent_type: str) -> ValidationReport:
    report = ValidationReport()
    add = report.violations.append
    verbs = tree.verbs()
    first = {}
    for i, v in enumerate(verbs):
        first.setdefault(v, i)

    for verb in REQUIRED_VERBS.get(intent_type, ()):
        if verb not in first:
            add(Violation("omission", "", f"no {verb} policy in a {intent_type} tree"))

    for earlier, later in SEQUENCE_RULES:
        if later in first and (earlier not in first or first[earlier] > first[later]):
            label = tree[first[later]].label
            add(Violation("sequence", label, f"{later} ({label}) must be preceded by {earlier}"))

    seen: set[str] = set()
    for p in tree:
        for ref in p.refs():
            if ref not in seen:
                add(Violation("dependency", p.label, f"{p.label} references {ref} which is not earlier in the tree"))
        seen.add(p.label)

    domain = intent.get("Domain")
    target = intent.get("Availability")
    for p in tree:
        zone = p.param("zone")
        if domain and zone is not None and str(zone) != domain:
            add(Violation("attribute", p.label, f"zone {zone} does not match intent domain {domain}"))
        if p.verb == "compliance" and target and p.param("availability") is not None:
            if abs(as_fraction(p.param("availability")) - as_fraction(target)) > 1e-12:
                add(Violation("attribute", p.label, f"availability {p.param('availability')} differs from intent {target}"))
        if p.verb == "create" and p.param("count") is not None and p.param("name") is not None:
            if as_int(p.param("count")) != len(as_list(p.param("name"))):
                add(Violation("attribute", p.label, "create count does not match the number of names"))
    return report


# ------------------------------------------------------------ action choice

FAILURE_KINDS = ("resource_status", "network", "utilization", "software", "link")


@dataclass
class Incident:
    """One degraded sub-service the assurance planner must repair."""

    resource: str
    service: str
    zone: str
    kinds: frozenset[str]
    gradient: float
    drift: DriftReport | None = None
    failed_actions: set[str] = field(default_factory=set)

    @property
    def magnitude(self) -> float:
        return abs(self.gradient)


@dataclass
class ActionCandidate:
    """A corrective action with penalty ``weight * |gradient|``.

    The action is sufficient when it is enabled, has not already failed for
    this incident and ``handles`` covers every failure kind observed (or a
    custom ``predicate`` says so).
    """

    name: str
    weight: float
    duration: float = 0.0
    handles: frozenset[str] = frozenset(FAILURE_KINDS)
    enabled: bool = True
    predicate: Callable[[Incident], bool] | None = None

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError(f"action {self.name}: weight must be positive")
        self.handles = frozenset(self.handles)

    def penalty(self, incident: Incident) -> float:
        return self.weight * incident.magnitude

    def sufficient(self, incident: Incident) -> bool:
        if not self.enabled or self.name in incident.failed_actions:
            return False
        if self.predicate is not None:
            return bool(self.predicate(incident))
        return incident.kinds <= self.handles


def default_actions() -> list[ActionCandidate]:
    return [
        ActionCandidate("restart", 1.0, 90.0, frozenset({"resource_status", "software"})),
        ActionCandidate("recreate", 2.0, 200.0),
    ]


def rank_actions(candidates: Sequence[ActionCandidate], incident: Incident) -> list[dict[str, Any]]:
    return [
        {"name": c.name, "weight": c.weight, "penalty": c.penalty(incident), "sufficient": c.sufficient(incident), "duration": c.duration}
        for c in candidates
    ]


def select_action(candidates: Sequence[ActionCandidate], incident: Incident) -> ActionCandidate:
    """Cheapest sufficient action; ties keep registry order."""
    best = None
    for c in candidates:
        if c.sufficient(incident) and (best is None or c.penalty(incident) < best.penalty(incident)):
            best = c
    if best is None:
        raise EscalationError(f"no sufficient corrective action for {incident.resource} ({sorted(incident.kinds)})")
    return best


def failure_kinds(sub: SubServiceHealth, metric_levels: Mapping[str, int]) -> frozenset[str]:
    kinds = set()
    if metric_levels.get("s_r", 1) < 1:
        kinds.add("resource_status")
    else:
        if metric_levels.get("s_net", 1) < 1:
            kinds.add("network")
        if any(metric_levels.get(k, 1) < 1 for k in ("u_cpu", "u_ram", "u_storage")):
            kinds.add("utilization")
        if sub.software < 1:
            kinds.add("software")
        if sub.agents < 1:
            kinds.add("link")
    return frozenset(kinds)


# ----------------------------------------------------------------- context


@dataclass
class AssuranceBrief:
    """What the assurance planner is told about the drift it must correct."""

    incident: Incident
    action: ActionCandidate
    target_data: dict[str, Any]
    operational_data: dict[str, Any]
    app: str = "App_1"
    service_kind: str = "collector"
    data_type: str = "netflow"
    source: Sequence[str] = ()


@dataclass
class PlannerContext:
    intent_text: str
    formal: FormalIntent
    intent_type: str
    targets: KpiVector
    phase: str = "fulfillment"
    history: list[tuple[Policy, ExecutionFeedback]] = field(default_factory=list)
    tree: PolicyTree | None = None
    brief: AssuranceBrief | None = None

    def __post_init__(self):
        if self.tree is None:
            self.tree = PolicyTree(self.phase)

    def feedback(self, label: str) -> ExecutionFeedback | None:
        for policy, fb in reversed(self.history):
            if policy.label == label:
                return fb
        return None

    def attempts(self, label: str) -> int:
        return sum(1 for p, _ in self.history if p.label == label)

    def record(self, policy: Policy, feedback: ExecutionFeedback) -> None:
        if self.tree.get(policy.label) is None:
            self.tree.append(policy)
        self.history.append((policy, feedback))

    def render_history(self) -> str:
        return "\n".join(f"{p} -> {fb}" for p, fb in self.history)


def known_entities(history: Iterable[tuple[Policy, ExecutionFeedback]]) -> set[str]:
    """Names that appeared in feedback so far (VMs, services, apps, switches)."""
    names: set[str] = set()

    def walk(x):
        if isinstance(x, dict):
            for k, v in x.items():
                if k in ("name", "zone", "switch") and isinstance(v, str):
                    names.add(v)
                walk(v)
        elif isinstance(x, (list, tuple)):
            for v in x:
                if isinstance(v, str):
                    names.add(v)
                walk(v)

    for policy, fb in history:
        walk(fb.state)
    return names
