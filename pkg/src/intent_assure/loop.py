"""The closed control loop: fulfil an intent, watch it, correct drift.

Drift checks happen only when the scheduled healthcheck fires. Availability
probes run every probe period in between and only accumulate downtime. After
a corrective policy tree finishes, the healthcheck is re-run at once to
verify the service realigned.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from .availability import (
    AvailabilityTracker,
    format_percent,
    intent_health,
    max_downtime,
)
from .drift import (
    DriftReport,
    Target,
    TargetSpec,
    drift_report,
    level_drift,
    levels_gradient,
)
from .errors import (
    AssuranceError,
    ConfigurationError,
    EscalationError,
    GenerationError,
    IllegalTransition,
    PlanningAborted,
)
from .health import RESOURCE_KPIS, ServiceHealthSnapshot
from .kpi import NORMAL, KpiValue, KpiVector, QuantBands, Unit
from .planner.core import (
    ActionCandidate,
    AssuranceBrief,
    Incident,
    PlannerContext,
    default_actions,
    failure_kinds,
    rank_actions,
)
from .policy import ExecutionFeedback, Policy
from .testbed import FaultEvent, Testbed

PHASES = ("fulfilling", "steady", "drift_detected", "correcting", "failed")
LEGAL_TRANSITIONS = frozenset(
    {
        ("fulfilling", "steady"),
        ("steady", "drift_detected"),
        ("drift_detected", "correcting"),
        ("correcting", "steady"),
        ("correcting", "failed"),
    }
)

MAX_POLICIES = 64

# Service-level KPIs are fractions. Health is normal only at 1; availability
# is normal from the four-nines target upward.
SERVICE_BANDS = {
    "k_Hs": QuantBands((0.25, 0.5, 0.75, 1.0), (1.0, 1.0, 1.0, 1.0), 0.0, 1.0, "k_Hs"),
    "k_As": QuantBands((0.99, 0.995, 0.999, 0.9999), (1.0, 1.0, 1.0, 1.0), 0.0, 1.0, "k_As"),
}


def check_transition(current: str, new: str) -> None:
    if new not in PHASES:
        raise IllegalTransition(f"unknown phase {new!r}")
    if new == "failed" or (current, new) in LEGAL_TRANSITIONS:
        return
    raise IllegalTransition(f"{current} -> {new} is not a legal loop transition")


@dataclass
class LoopState:
    """Mutable loop state, owned by exactly one loop."""

    phase: str = "fulfilling"
    targets: TargetSpec = field(default_factory=TargetSpec)
    target_vector: KpiVector | None = None
    target_data: dict[str, Any] = field(default_factory=dict)
    tracker: AvailabilityTracker | None = None
    last_drift: DriftReport | None = None
    cycles: int = 0
    transitions: list[tuple[str, str, float]] = field(default_factory=list)
    diagnostic: str = ""

    def move(self, new: str, at: float = 0.0) -> None:
        check_transition(self.phase, new)
        self.transitions.append((self.phase, new, at))
        self.phase = new

    def fail(self, reason: str, at: float = 0.0) -> None:
        self.diagnostic = reason
        if self.phase != "failed":
            self.move("failed", at)


@dataclass
class ScenarioResult:
    """Everything a report needs; plain JSON-compatible values only."""

    name: str
    seed: int
    planner: str
    intent: str
    formal: dict[str, str]
    intent_type: str
    phase: str
    diagnostic: str
    fulfillment: list[dict]
    validation: dict
    assurance: list[dict]
    drift_trace: list[dict]
    kpis: dict[str, dict]
    timings: dict[str, Any]
    availability: dict[str, Any]
    transitions: list[list]
    faults: list[dict]

    def assurance_policies(self) -> list[dict]:
        return [rec for episode in self.assurance for rec in episode["policies"]]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "planner": self.planner,
            "intent": self.intent,
            "formal": self.formal,
            "intent_type": self.intent_type,
            "phase": self.phase,
            "diagnostic": self.diagnostic,
            "fulfillment": self.fulfillment,
            "validation": self.validation,
            "assurance": self.assurance,
            "drift_trace": self.drift_trace,
            "kpis": self.kpis,
            "timings": self.timings,
            "availability": self.availability,
            "transitions": self.transitions,
            "faults": self.faults,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioResult:
        return cls(**data)


def _policy_record(policy: Policy, feedback: ExecutionFeedback, started: float, duration: float) -> dict:
    return {
        "label": policy.label,
        "policy": str(policy),
        "verb": policy.verb,
        "feedback": str(feedback),
        "success": feedback.success,
        "state": feedback.state,
        "sim_time": started,
        "duration": duration,
    }


def service_targets(availability: float) -> TargetSpec:
    return TargetSpec({"k_Hs": Target.point(1.0), "k_As": Target(availability, 1.0)})


def target_data(availability: float) -> dict[str, Any]:
    """The target vectors handed to the assurance planner."""
    return {
        "K_T": {"k_As": availability},
        "h_r": {k: NORMAL for k in RESOURCE_KPIS},
        "h_s": {"h_r": NORMAL, "h_sw": NORMAL, "h_a": NORMAL},
        "h_a": {"h_r_a": NORMAL, "h_sw_a": NORMAL, "h_net_a": NORMAL},
        "k_Hs": {"k_Hr": NORMAL, "k_Hsw": NORMAL, "k_Hnet": NORMAL},
        "k_Hs_pct": 100.0,
    }


def _kpi_snapshot(snapshot: ServiceHealthSnapshot, availability: float, at: float) -> dict:
    return {
        "time": at,
        "k_Hs_pct": snapshot.percent,
        "k_As": availability,
        "k_As_display": format_percent(availability),
        "service": snapshot.to_dict(),
    }


class AssuranceLoop:
    """Drives one intent through fulfillment and repeated assurance cycles."""

    def __init__(
        self,
        testbed: Testbed,
        planner,
        actions: Sequence[ActionCandidate] | None = None,
        t_planned: float = 720 * 3600.0,
        service_bands: dict[str, QuantBands] | None = None,
        app: str = "App_1",
    ):
        self.testbed = testbed
        self.planner = planner
        self.actions = list(actions) if actions is not None else default_actions()
        self.service_bands = dict(service_bands or SERVICE_BANDS)
        self.app = app
        self.state = LoopState(tracker=AvailabilityTracker(t_planned, testbed.probe_period))
        testbed.tracker = self.state.tracker
        self.ctx: PlannerContext | None = None
        self.fulfillment: list[dict] = []
        self.validation: dict = {"ok": False, "violations": []}
        self.episodes: list[dict] = []
        self.drift_trace: list[dict] = []
        self.kpis: dict[str, dict] = {}
        self.planner_wall = {"fulfillment": 0.0, "assurance": 0.0}
        self.service_name: str | None = None

    # ------------------------------------------------------------ planning

    def _plan_and_execute(self, ctx: PlannerContext, sink: list[dict], phase: str, extra=None) -> None:
        """Ask for policies one at a time and dispatch each; raises on abort."""
        for _ in range(MAX_POLICIES):
            started = time.perf_counter()
            try:
                policy = self.planner.next_policy(ctx)
            finally:
                self.planner_wall[phase] += time.perf_counter() - started
            if policy is None:
                return
            t0 = self.testbed.clock
            feedback = self.testbed.dispatch(policy, ctx.history)
            ctx.record(policy, feedback)
            record = _policy_record(policy, feedback, t0, self.testbed.clock - t0)
            if extra:
                record.update(extra)
            sink.append(record)
        raise GenerationError(f"planner exceeded {MAX_POLICIES} policies")

    def run_fulfillment(self, intent: str) -> LoopState:
        state = self.state
        started = time.perf_counter()
        try:
            formal = self.planner.formalize(intent)
            intent_type = self.planner.classify(intent)
            targets = self.planner.extract_kpis(formal)
        except AssuranceError as exc:
            self.planner_wall["fulfillment"] += time.perf_counter() - started
            state.fail(f"intent not understood: {exc}", self.testbed.clock)
            return state
        self.planner_wall["fulfillment"] += time.perf_counter() - started
        self.ctx = PlannerContext(intent, formal, intent_type, targets, "fulfillment")
        try:
            self._plan_and_execute(self.ctx, self.fulfillment, "fulfillment")
        except AssuranceError as exc:
            state.fail(f"fulfillment aborted: {exc}", self.testbed.clock)
            return state
        report = self.planner.validate(self.ctx.tree, formal, intent_type)
        self.validation = report.to_dict()
        if not report.ok:
            state.fail(f"policy tree failed validation: {[v.message for v in report.violations]}", self.testbed.clock)
            return state

        availability = targets.as_dict().get("Availability")
        if availability is None:
            zone = self.testbed.zones.get(formal.get("Domain") or "")
            availability = zone.compliance_target if zone and zone.compliance_target else 0.9999
        state.targets = service_targets(availability)
        state.target_vector = KpiVector(
            (KpiValue("k_Hs", 1.0, Unit.FRACTION), KpiValue("k_As", availability, Unit.FRACTION)), "target"
        )
        state.target_data = target_data(availability)
        self.kpis["target"] = {"k_Hs_pct": 100.0, "k_As": availability, "k_As_display": format_percent(availability)}
        healthchecks = [p for p in self.ctx.tree if p.verb == "healthcheck"]
        if healthchecks:
            self.service_name = str(healthchecks[0].subject)
            self.app = str(healthchecks[0].param("output", self.app))
        state.move("steady", self.testbed.clock)
        return state

    # ----------------------------------------------------------- assurance

    def _read(self) -> tuple[ServiceHealthSnapshot, dict, float, float]:
        app = self.testbed.apps.get(self.app)
        if app is None:
            raise ConfigurationError(f"no healthcheck output {self.app!r} to assess")
        return app["snapshot"], app["metrics"], app["availability"], app["time"]

    def _service_drift(self, snapshot: ServiceHealthSnapshot, availability: float) -> DriftReport:
        op = KpiVector(
            (KpiValue("k_Hs", snapshot.percent / 100.0, Unit.FRACTION), KpiValue("k_As", availability, Unit.FRACTION))
        )
        return drift_report(op, self.state.targets, self.service_bands)

    def _record_drift(self, drift: DriftReport, snapshot: ServiceHealthSnapshot, availability: float, at: float, kind: str):
        self.drift_trace.append(
            {
                "time": at,
                "kind": kind,
                "k_Hs_pct": snapshot.percent,
                "k_As": availability,
                "distance": drift.distance,
                "gradient": dict(zip(drift.names, drift.gradient.raw)),
                "is_zero_drift": drift.is_zero_drift,
            }
        )

    def _analyze(self, snapshot: ServiceHealthSnapshot, metrics: dict, drift: DriftReport) -> list[dict]:
        """Per-sub-service breakdown: metric levels, level deltas and sub-service gradient."""
        bands = self.testbed.bands
        rows = []
        for sub in snapshot.subservices:
            m = metrics[sub.name]
            delta, grad = level_drift(m.as_kpis(), bands)
            sub_grad = levels_gradient({sub.name: sub.combined}).raw[0]
            levels = {n: int(d) + NORMAL for n, d in zip(delta.names, delta.values)}
            rows.append(
                {
                    "name": sub.name,
                    "metrics": m.to_dict(),
                    "metric_levels": levels,
                    "metric_delta": delta.as_dict(),
                    "metric_gradient": dict(zip(grad.names, grad.raw)),
                    "health": sub.to_dict(),
                    "gradient": sub_grad,
                    "kinds": sorted(failure_kinds(sub, levels)),
                }
            )
        return rows

    def _vm_zone(self, name: str) -> str:
        return self.testbed.vms[name].zone

    def _brief(self, incident: Incident, action: ActionCandidate, analysis: list[dict], snapshot, availability) -> AssuranceBrief:
        service = self.testbed.services[incident.service]
        operational = {
            "k_As": availability,
            "h_r": {row["name"]: row["metric_levels"] for row in analysis},
            "h_s": {row["name"]: row["health"] for row in analysis},
            "k_Hs": {"k_Hr": snapshot.k_hr, "k_Hsw": snapshot.k_hsw, "k_Hnet": snapshot.k_hnet},
            "k_Hs_pct": snapshot.percent,
        }
        return AssuranceBrief(
            incident,
            action,
            self.state.target_data,
            operational,
            app=self.app,
            service_kind=service.kind,
            data_type=service.type,
            source=tuple(service.config.get("source", ())),
        )

    def _correct(self, incident: Incident, analysis, snapshot, availability, drift: DriftReport) -> bool:
        """Run the escalation ladder for one incident. True when an action tree completes."""
        while True:
            try:
                action = self.planner.select_action(self.actions, incident)
            except EscalationError as exc:
                self.state.diagnostic = str(exc)
                return False
            ranking = rank_actions(self.actions, incident)
            ctx = PlannerContext(
                self.ctx.intent_text,
                self.ctx.formal,
                self.ctx.intent_type,
                self.ctx.targets,
                "assurance",
                brief=self._brief(incident, action, analysis, snapshot, availability),
            )
            episode = {
                "time": self.testbed.clock,
                "resource": incident.resource,
                "service": incident.service,
                "kinds": sorted(incident.kinds),
                "gradient": incident.gradient,
                "action": action.name,
                "action_downtime": action.duration,
                "ranking": ranking,
                "analysis": analysis,
                "drift": drift.to_dict(),
                "policies": [],
                "completed": False,
            }
            self.episodes.append(episode)
            try:
                self._plan_and_execute(ctx, episode["policies"], "assurance", {"drift": drift.to_dict()})
            except (PlanningAborted, GenerationError) as exc:
                episode["error"] = str(exc)
                incident.failed_actions.add(action.name)
                continue
            episode["completed"] = True
            episode["finished"] = self.testbed.clock
            return True

    def run_assurance_cycle(self) -> LoopState:
        """Assess the latest healthcheck output and correct any drift found."""
        state = self.state
        if state.phase not in ("steady", "drift_detected", "correcting"):
            raise IllegalTransition(f"assurance cycle needs a running loop, phase is {state.phase}")
        state.cycles += 1
        snapshot, metrics, availability, at = self._read()
        drift = self._service_drift(snapshot, availability)
        state.last_drift = drift
        self._record_drift(drift, snapshot, availability, at, "healthcheck")
        if drift.is_zero_drift:
            return state

        state.move("drift_detected", self.testbed.clock)
        self.kpis.setdefault("t1", _kpi_snapshot(snapshot, availability, at) | {"drift": drift.to_dict()})
        analysis = self._analyze(snapshot, metrics, drift)
        state.move("correcting", self.testbed.clock)

        for row in sorted((r for r in analysis if r["health"]["h_s"] < NORMAL), key=lambda r: (r["gradient"], r["name"])):
            incident = Incident(
                row["name"],
                self.service_name,
                self._vm_zone(row["name"]),
                frozenset(row["kinds"]),
                row["gradient"],
                drift,
            )
            if not self._correct(incident, analysis, snapshot, availability, drift):
                state.fail(f"no corrective action left for {incident.resource}: {state.diagnostic}", self.testbed.clock)
                return state

        verify = self.testbed.run_job_now(self._healthcheck_label())
        snapshot, metrics, availability, at = self._read()
        after = self._service_drift(snapshot, availability)
        state.last_drift = after
        self._record_drift(after, snapshot, availability, at, "reverify")
        if not verify.success or not after.is_zero_drift:
            if snapshot.percent == 100.0:
                reason = f"service healthy again but availability {availability!r} is below target; downtime budget exhausted"
            else:
                reason = f"drift persists after corrective actions (k_Hs {snapshot.percent}%)"
            state.fail(reason, self.testbed.clock)
            return state
        self.kpis["t2"] = _kpi_snapshot(snapshot, availability, at) | {"drift": after.to_dict()}
        state.move("steady", self.testbed.clock)
        return state

    def _healthcheck_label(self) -> str:
        for job in self.testbed.jobs:
            if job.policy.verb == "healthcheck":
                return job.label
        raise ConfigurationError("no healthcheck is scheduled")

    # ------------------------------------------------------------ running

    def run_until(self, end: float) -> None:
        """Advance simulated time to ``end``, running a cycle at each healthcheck."""
        tb = self.testbed
        while tb.clock < end:
            nxt = tb.next_job_time()
            if self.state.phase == "failed" or nxt is None or nxt > end:
                tb.advance_clock(end - tb.clock)
                break
            if nxt > tb.clock:
                tb.advance_clock(nxt - tb.clock)
            fired = tb.drain()
            if any(e.kind == "healthcheck" for e in fired):
                self.run_assurance_cycle()


def resolve_fault_time(spec: dict, testbed: Testbed, fulfilled_at: float) -> float:
    """Absolute firing time of a scenario fault.

    ``anchor`` is ``start`` (absolute), ``fulfillment`` (end of fulfillment)
    or ``healthcheck`` (the ``index``-th scheduled healthcheck after
    fulfillment); ``offset_s`` is added to the anchor.
    """
    anchor = spec.get("anchor", "fulfillment")
    offset = float(spec.get("offset_s", 0.0))
    if anchor == "start":
        return offset
    if anchor == "fulfillment":
        return fulfilled_at + offset
    if anchor == "healthcheck":
        first = testbed.next_job_time()
        if first is None:
            raise ConfigurationError("fault anchored to a healthcheck but none is scheduled")
        period = next(j.period for j in testbed.jobs if j.policy.verb == "healthcheck")
        return first + (int(spec.get("index", 1)) - 1) * period + offset
    raise ConfigurationError(f"unknown fault anchor {anchor!r}")


def run_fulfillment(intent: str, planner, testbed: Testbed, **kwargs) -> tuple[LoopState, AssuranceLoop]:
    loop = AssuranceLoop(testbed, planner, **kwargs)
    return loop.run_fulfillment(intent), loop


def run_assurance_cycle(loop: AssuranceLoop) -> LoopState:
    return loop.run_assurance_cycle()


def _timings(loop: AssuranceLoop, latency: dict[str, float] | None) -> dict:
    fulfil = sum(r["duration"] for r in loop.fulfillment)
    assure = sum(r["duration"] for ep in loop.episodes for r in ep["policies"])
    out = {
        "fulfillment": {"policies": len(loop.fulfillment), "testbed_s": fulfil},
        "assurance": {"policies": sum(len(ep["policies"]) for ep in loop.episodes), "testbed_s": assure},
    }
    if latency is not None:
        for phase in ("fulfillment", "assurance"):
            out[phase]["planner_latency_s"] = latency.get(phase, 0.0)
    return out


def run_scenario(scenario, seed: int | None = None, planner=None, record_latency: bool = False) -> ScenarioResult:
    """Fulfil the scenario intent, inject its faults and run the loop to the end of the window."""
    from .planner import make_planner
    from .scenario import build_testbed

    seed = scenario.seed if seed is None else int(seed)
    testbed = build_testbed(scenario, seed)
    if planner is None:
        planner = make_planner(scenario.planner, transcript=scenario.transcript)
    loop = AssuranceLoop(
        testbed,
        planner,
        actions=scenario.actions,
        t_planned=scenario.horizon_h * 3600.0,
        service_bands=scenario.service_bands,
    )
    loop.run_fulfillment(scenario.intent)
    fulfilled_at = testbed.clock

    faults = []
    fulfilled = loop.state.phase != "failed"
    if fulfilled:
        for spec in scenario.faults:
            at = resolve_fault_time(spec, testbed, fulfilled_at)
            event = FaultEvent(at, spec["target"], spec["kind"], spec.get("metric"), spec.get("value"))
            testbed.schedule_fault(event)
            faults.append(event.to_dict())
        start = testbed.probe_start if testbed.probe_start is not None else fulfilled_at
        loop.run_until(start + scenario.simulate_h * 3600.0)

    tracker = loop.state.tracker
    target = loop.state.targets.get("k_As")
    threshold = target.low if target is not None else 0.9999
    availability = tracker.availability()
    action_downtime = sum(
        r["duration"] for ep in loop.episodes for r in ep["policies"] if r["verb"] in ("restart", "recreate")
    )
    latency = None
    if record_latency:
        latency = {k: round(v, 3) for k, v in loop.planner_wall.items()}
    return ScenarioResult(
        name=scenario.name,
        seed=seed,
        planner=getattr(planner, "mode", "rules"),
        intent=scenario.intent,
        formal=loop.ctx.formal.as_dict() if loop.ctx else {},
        intent_type=loop.ctx.intent_type if loop.ctx else "",
        phase=loop.state.phase,
        diagnostic=loop.state.diagnostic,
        fulfillment=loop.fulfillment,
        validation=loop.validation,
        assurance=loop.episodes,
        drift_trace=loop.drift_trace,
        kpis=loop.kpis,
        timings=_timings(loop, latency),
        availability={
            **tracker.snapshot(),
            "target": threshold,
            "display": format_percent(availability),
            "max_downtime_s": max_downtime(threshold, tracker.t_planned) if 0 < threshold < 1 else 0.0,
            "action_downtime_s": action_downtime,
            # A service that was never built cannot meet its intent.
            "intent_health": intent_health(availability, threshold) if fulfilled else 0,
        },
        transitions=[list(t) for t in loop.state.transitions],
        faults=faults,
    )
