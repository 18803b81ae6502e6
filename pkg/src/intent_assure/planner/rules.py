"""Deterministic rule-based planner.

Fulfillment follows a fixed script whose parameters come from earlier
feedback (the compliance count sizes the create, the switch list feeds
configure). Assurance emits measure, corrective action, validate and
restart-of-service steps for the incident in the brief.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

from ..errors import GenerationError, PlanningAborted
from ..kpi import KpiVector
from ..policy import Policy, PolicyTree, Ref
from .core import (
    ActionCandidate,
    FormalIntent,
    Incident,
    PlannerContext,
    ValidationReport,
    classify_intent,
    extract_kpis,
    formalize_intent,
    select_action,
    service_stem,
    validate_tree,
)

Step = Callable[[PlannerContext], Policy]

MAX_ATTEMPTS = 2


def _zone(ctx: PlannerContext) -> str:
    zone = ctx.formal.get("Domain")
    if not zone:
        raise GenerationError("intent has no Domain to plan against")
    return zone


def _percent_param(ctx: PlannerContext) -> str:
    value = ctx.formal.get("Availability")
    if not value:
        raise GenerationError("intent has no availability objective")
    return value.rstrip("%")


def _required(ctx: PlannerContext, label: str, key: str):
    fb = ctx.feedback(label)
    if fb is None or not fb.success:
        raise GenerationError(f"{label} has no successful feedback to read {key!r} from")
    state = fb.state
    if isinstance(state, dict) and key in state:
        return state[key]
    raise GenerationError(f"{label} feedback lacks {key!r}")


def _names(ctx: PlannerContext) -> tuple[str, ...]:
    count = int(_required(ctx, "A1", "count"))
    stem = service_stem(ctx.formal)
    return tuple(f"{stem}_{i}" for i in range(1, count + 1))


def _size(ctx: PlannerContext, count: int) -> str:
    fb = ctx.feedback("A2")
    if fb is None or not fb.success:
        raise GenerationError("A2 inventory feedback missing")
    for row in fb.state:
        if int(row["count"]) >= count:
            return str(row["size"])
    raise GenerationError(f"no vm size with {count} free instances")


def _service_name(ctx: PlannerContext) -> str:
    return f"service_{(ctx.formal.get('Data Type') or service_stem(ctx.formal)).lower()}"


def _fulfillment_script() -> list[Step]:
    def m1(ctx):
        return Policy("M1", "get", "domain", (("zone", _zone(ctx)), ("kpi", "availability")))

    def m2(ctx):
        return Policy("M2", "get", "switch", (("zone", _zone(ctx)),))

    def a1(ctx):
        return Policy(
            "A1",
            "compliance",
            "domain",
            (("zone", _zone(ctx)), ("availability", _percent_param(ctx)), ("type", "vm")),
        )

    def a2(ctx):
        count = _required(ctx, "A1", "count")
        return Policy("A2", "avail", "vm", (("zone", _zone(ctx)), ("count", str(count))))

    def e1(ctx):
        names = _names(ctx)
        return Policy(
            "E1",
            "create",
            "vm",
            (
                ("zone", _zone(ctx)),
                ("count", str(len(names))),
                ("size", _size(ctx, len(names))),
                ("name", names),
                ("image", "ubuntu"),
            ),
        )

    def e2(ctx):
        return Policy("E2", "validate", _names(ctx), (("zone", _zone(ctx)),))

    def e3(ctx):
        stem = service_stem(ctx.formal)
        data = (ctx.formal.get("Data Type") or stem).lower()
        return Policy(
            "E3",
            "deploy",
            _names(ctx),
            (("service", stem), ("type", data), ("name", _service_name(ctx))),
        )

    def e4(ctx):
        return Policy(
            "E4",
            "configure",
            _names(ctx),
            (("service", _service_name(ctx)), ("source", Ref("M2")), ("zone", _zone(ctx))),
        )

    def e5(ctx):
        return Policy("E5", "start", _names(ctx), (("service", _service_name(ctx)), ("zone", _zone(ctx))))

    def e6(ctx):
        return Policy("E6", "healthcheck", _service_name(ctx), (("output", "App_1"), ("name", "health")))

    def e7(ctx):
        return Policy("E7", "schedule", Ref("E6"), (("frequency", "hourly"),))

    def e8(ctx):
        return Policy("E8", "get", "App_1", (("name", "health"), ("kpi", "target")))

    return [m1, m2, a1, a2, e1, e2, e3, e4, e5, e6, e7, e8]


def _discover_script() -> list[Step]:
    def m1(ctx):
        return Policy("M1", "get", "switch", (("zone", _zone(ctx)),))

    return [m1]


def _assurance_script(ctx: PlannerContext) -> list[Step]:
    brief = ctx.brief
    if brief is None:
        raise GenerationError("assurance planning needs an assurance brief")
    inc, action = brief.incident, brief.action
    zone = inc.zone
    steps: list[Step] = [
        lambda c: Policy("E1", "get", brief.app, (("name", "health"), ("kpi", "operational"))),
        lambda c: Policy("E2", action.name, inc.resource, (("zone", zone),)),
        lambda c: Policy("E3", "validate", inc.resource, (("zone", zone),)),
    ]
    if action.name == "recreate":
        steps += [
            lambda c: Policy(
                f"E{len(c.tree) + 1}",
                "deploy",
                inc.resource,
                (("service", brief.service_kind), ("type", brief.data_type), ("name", inc.service)),
            ),
            lambda c: Policy(
                f"E{len(c.tree) + 1}",
                "configure",
                inc.resource,
                (("service", inc.service), ("source", tuple(brief.source)), ("zone", zone)),
            ),
        ]
    steps.append(lambda c: Policy(f"E{len(c.tree) + 1}", "start", inc.resource, (("service", inc.service), ("zone", zone))))
    return steps


class RulePlanner:
    """Same interface as the chat-model planner, no external calls."""

    mode = "rules"

    def formalize(self, text: str) -> FormalIntent:
        return formalize_intent(text)

    def classify(self, text: str) -> str:
        return classify_intent(text)

    def extract_kpis(self, intent: FormalIntent) -> KpiVector:
        return extract_kpis(intent)

    def validate(self, tree: PolicyTree, intent: FormalIntent, intent_type: str) -> ValidationReport:
        return validate_tree(tree, intent, intent_type)

    def select_action(self, candidates: Sequence[ActionCandidate], incident: Incident) -> ActionCandidate:
        return select_action(candidates, incident)

    def script(self, ctx: PlannerContext) -> list[Step]:
        if ctx.phase == "assurance":
            return _assurance_script(ctx)
        if ctx.intent_type == "discover_resource":
            return _discover_script()
        return _fulfillment_script()

    def next_policy(self, ctx: PlannerContext) -> Policy | None:
        """Next policy, or ``None`` when the tree is complete.

        A failed measure/analyze policy aborts; a failed execute policy is
        retried once with the same tuple before aborting.
        """
        if ctx.history:
            last, fb = ctx.history[-1]
            if not fb.success:
                if last.label[0] != "E" or ctx.attempts(last.label) >= MAX_ATTEMPTS:
                    raise PlanningAborted(f"{last} failed: {fb}")
                return last
        steps = self.script(ctx)
        index = len(ctx.tree)
        if index >= len(steps):
            return None
        return steps[index](ctx)
