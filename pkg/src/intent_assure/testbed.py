"""Deterministic simulated cloud testbed.

Zones hold switches, a VM inventory and monitored agents. Policies are
dispatched to per-verb handlers that mutate the state and return
:class:`~intent_assure.policy.ExecutionFeedback`. Every dispatch costs
simulated time; while the clock moves, faults, VM restores, availability
probes and scheduled jobs fire in timestamp order (ties: fault, restore,
probe, job).
"""

from __future__ import annotations

import heapq
import itertools
import logging
import re
import zlib
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .availability import AvailabilityTracker, format_percent, required_redundancy
from .errors import ConfigurationError, DomainError
from .health import (
    RESOURCE_KPIS,
    AgentHealthInputs,
    AgentStatus,
    ResourceMetrics,
    ServiceHealthSnapshot,
    SubServiceHealth,
    agent_health,
    assess_service,
    default_resource_bands,
    resource_health,
    resource_health_batch,
)
from .kpi import CRITICAL, NORMAL, QuantBands
from .policy import ExecutionFeedback, Policy, Ref, as_fraction, as_int, as_list

log = logging.getLogger(__name__)

DEFAULT_DURATIONS = {
    "get": 2.0,
    "compliance": 2.0,
    "avail": 2.0,
    "create": 120.0,
    "validate": 10.0,
    "deploy": 60.0,
    "configure": 30.0,
    "start": 20.0,
    "healthcheck": 5.0,
    "schedule": 1.0,
    "restart": 90.0,
    "recreate": 200.0,
}
FREQUENCIES = {"minutely": 60.0, "hourly": 3600.0, "daily": 86400.0}
SIZES = ("small", "medium", "large")

FAULT_KINDS = ("shutdown", "hardware", "degrade", "link_down")

_ORDER = {"fault": 0, "restore": 1, "probe": 2, "job": 3}


class TestbedFault(Exception):
    """Handler-level failure turned into ``(False, {error: code})`` feedback."""

    code = "bad_request"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class NotFound(TestbedFault):
    code = "not_found"


class NoCapacity(TestbedFault):
    code = "no_capacity"


class BadRequest(TestbedFault):
    code = "bad_request"


def parse_frequency(value: str) -> float:
    if value in FREQUENCIES:
        return FREQUENCIES[value]
    m = re.fullmatch(r"(\d+(?:\.\d+)?)([smh])", str(value))
    if not m:
        raise BadRequest(f"unknown frequency {value!r}")
    return float(m.group(1)) * {"s": 1.0, "m": 60.0, "h": 3600.0}[m.group(2)]


@dataclass
class AgentSpec:
    name: str
    resource: int = 1
    software: int = 1


@dataclass
class Zone:
    name: str
    base_availability: float = 0.999
    switches: list[str] = field(default_factory=lambda: ["sw_1", "sw_2", "sw_3"])
    inventory: dict[str, int] = field(default_factory=lambda: {"small": 50, "medium": 20, "large": 15})
    agents: list[AgentSpec] = field(default_factory=list)
    ip_prefix: str = "10.0.0."
    next_host: int = 10
    compliance_target: float | None = None

    def allocate_ip(self) -> str:
        ip = f"{self.ip_prefix}{self.next_host}"
        self.next_host += 1
        return ip


@dataclass
class VM:
    name: str
    zone: str
    ip: str
    size: str
    image: str
    status: str = "active"
    created_at: float = 0.0
    validated: bool = False
    link_down: bool = False
    hardware_fault: bool = False
    degraded: dict[str, float] = field(default_factory=dict)
    rng: np.random.Generator | None = None


@dataclass
class Service:
    name: str
    kind: str
    type: str
    zone: str
    members: list[str] = field(default_factory=list)
    member_state: dict[str, str] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    status: str = "deployed"
    availability_target: float | None = None


@dataclass
class Job:
    label: str
    policy: Policy
    period: float
    next_fire: float


@dataclass(frozen=True)
class FaultEvent:
    """``kind`` is ``shutdown``, ``hardware``, ``degrade`` (needs ``metric`` and ``value``) or ``link_down``.

    ``hardware`` powers the VM off like ``shutdown`` but the host stays
    broken, so a restart brings it back down; only a recreate repairs it.
    """

    at: float
    target: str
    kind: str
    metric: str | None = None
    value: float | None = None

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise ConfigurationError(f"unknown fault kind {self.kind!r}")
        if self.kind == "degrade" and (self.metric not in RESOURCE_KPIS[:3] or self.value is None):
            raise ConfigurationError("degrade faults need metric (u_cpu|u_ram|u_storage) and value")

    def to_dict(self) -> dict:
        out = {"at": self.at, "target": self.target, "kind": self.kind}
        if self.kind == "degrade":
            out.update(metric=self.metric, value=self.value)
        return out


@dataclass(frozen=True)
class FiredEvent:
    time: float
    kind: str
    detail: Mapping[str, Any]


@dataclass
class MetricProfile:
    """Baseline generator for an active collector VM (percent values)."""

    cpu_mean: float = 50.0
    cpu_sd: float = 4.0
    cpu_range: tuple[float, float] = (40.0, 60.0)
    ram_mean: float = 57.5
    ram_sd: float = 1.2
    ram_range: tuple[float, float] = (55.0, 60.0)
    storage_start: float = 50.0
    storage_growth_per_hour: float = 0.015
    storage_sd: float = 0.3


@dataclass
class TraceRecord:
    policy: Policy
    feedback: ExecutionFeedback
    sim_time: float
    duration: float

    def to_json(self) -> dict:
        return {
            "policy": str(self.policy),
            "feedback": self.feedback.to_json(),
            "sim_time": self.sim_time,
            "duration": self.duration,
        }


class Testbed:
    """Mutable simulated infrastructure. Single owner; not thread-safe."""

    def __init__(
        self,
        zones: Iterable[Zone] = (),
        seed: int = 0,
        durations: Mapping[str, float] | None = None,
        probe_period: float = 60.0,
        bands: Mapping[str, QuantBands] | None = None,
        agent_policy: str = "strict",
        agent_k: int | None = None,
        profile: MetricProfile | None = None,
    ):
        self.zones: dict[str, Zone] = {z.name: z for z in zones}
        self.seed = int(seed)
        self.durations = {**DEFAULT_DURATIONS, **(durations or {})}
        self.probe_period = float(probe_period)
        self.bands = dict(bands or default_resource_bands())
        self.agent_policy = agent_policy
        self.agent_k = agent_k
        self.profile = profile or MetricProfile()
        self.vms: dict[str, VM] = {}
        self.services: dict[str, Service] = {}
        self.jobs: list[Job] = []
        self.apps: dict[str, dict[str, Any]] = {}
        self.clock = 0.0
        self.tracker: AvailabilityTracker | None = None
        self.probe_start: float | None = None
        self.trace: list[TraceRecord] = []
        self.outbox: list[FiredEvent] = []
        self.outages: dict[str, list[list[float | None]]] = {}
        self._pending: list[tuple[float, int, int, str, Any]] = []
        self._seq = itertools.count()
        self._next_probe: float | None = None
        self._handlers: dict[str, Callable] = {
            "get": self._get,
            "compliance": self._compliance,
            "avail": self._avail,
            "create": self._create,
            "validate": self._validate,
            "deploy": self._deploy,
            "configure": self._configure,
            "start": self._start,
            "healthcheck": self._healthcheck,
            "schedule": self._schedule,
            "restart": self._restart,
            "recreate": self._recreate,
        }

    # ------------------------------------------------------------------ lookup

    def zone(self, name: Any) -> Zone:
        try:
            return self.zones[str(name)]
        except KeyError:
            raise NotFound(f"zone {name!r}") from None

    def vm(self, name: Any) -> VM:
        try:
            return self.vms[str(name)]
        except KeyError:
            raise NotFound(f"vm {name!r}") from None

    def service(self, name: Any) -> Service:
        try:
            return self.services[str(name)]
        except KeyError:
            raise NotFound(f"service {name!r}") from None

    def _zone_param(self, policy: Policy) -> Zone:
        zone = policy.param("zone")
        if zone is None:
            raise BadRequest(f"{policy.verb} needs a zone parameter")
        return self.zone(zone)

    # ----------------------------------------------------------------- metrics

    def _rng(self, vm: VM) -> np.random.Generator:
        if vm.rng is None:
            vm.rng = np.random.default_rng(np.random.SeedSequence([self.seed, zlib.crc32(vm.name.encode())]))
        return vm.rng

    def sample_metrics_batch(self, name: str, times: Sequence[float]) -> np.ndarray:
        """``(len(times), 5)`` metric rows; dead or restarting VMs read all zeros."""
        vm = self.vm(name)
        times = np.asarray(times, dtype=np.float64)
        n = times.size
        if vm.status != "active":
            return np.zeros((n, len(RESOURCE_KPIS)))
        p = self.profile
        z = self._rng(vm).standard_normal((n, 3))
        cpu = np.clip(p.cpu_mean + p.cpu_sd * z[:, 0], *p.cpu_range)
        ram = np.clip(p.ram_mean + p.ram_sd * z[:, 1], *p.ram_range)
        hours = (times - vm.created_at) / 3600.0
        storage = np.clip(p.storage_start + p.storage_growth_per_hour * hours + p.storage_sd * z[:, 2], 0.0, 100.0)
        out = np.column_stack([cpu, ram, storage, np.full(n, 100.0), np.full(n, 100.0)])
        for metric, value in vm.degraded.items():
            out[:, RESOURCE_KPIS.index(metric)] = value
        return out

    def sample_metrics(self, name: str) -> ResourceMetrics:
        row = self.sample_metrics_batch(name, [self.clock])[0]
        return ResourceMetrics(*(float(x) for x in row))

    # ------------------------------------------------------------------ health

    def _software(self, service: Service, vm: VM) -> int:
        return 1 if vm.status == "active" and service.member_state.get(vm.name) == "running" else 0

    def _agents(self, vm: VM) -> AgentHealthInputs:
        link = 1 if vm.status == "active" and not vm.link_down else 0
        agents = self.zone(vm.zone).agents or [AgentSpec("agent_1")]
        return AgentHealthInputs(tuple(AgentStatus(a.resource, a.software, link) for a in agents))

    def _agent_level(self, vm: VM) -> int:
        if self.agent_policy == "count_match":
            inputs = self._agents(vm)
            inputs = AgentHealthInputs(inputs.agents, self.agent_k)
            return NORMAL if agent_health(inputs, "count_match") else CRITICAL
        return int(agent_health(self._agents(vm), self.agent_policy))

    def evaluate_service(self, name: str) -> tuple[ServiceHealthSnapshot, dict[str, ResourceMetrics]]:
        service = self.service(name)
        subservices, metrics = [], {}
        for member in service.members:
            vm = self.vm(member)
            m = self.sample_metrics(member)
            metrics[member] = m
            subservices.append(
                SubServiceHealth(member, resource_health(m, self.bands), self._software(service, vm), self._agent_level(vm))
            )
        return assess_service(subservices), metrics

    def _probe_levels(self, times: np.ndarray) -> np.ndarray:
        """Worst sub-service level across monitored services for each probe time."""
        worst = np.ones(times.size, dtype=np.int8)
        for service in self.services.values():
            if service.status != "active":
                continue
            for member in service.members:
                vm = self.vm(member)
                samples = self.sample_metrics_batch(member, times)
                levels = resource_health_batch(samples, self.bands)
                fixed = min(self._software(service, vm), self._agent_level(vm))
                worst = np.minimum(worst, np.minimum(levels, fixed))
        return worst

    # ------------------------------------------------------------------- clock

    def schedule_fault(self, event: FaultEvent) -> None:
        if event.at < self.clock:
            raise ConfigurationError(f"fault at {event.at} is in the past (clock {self.clock})")
        self._push(event.at, "fault", event)

    def _push(self, at: float, kind: str, payload: Any) -> None:
        heapq.heappush(self._pending, (float(at), _ORDER[kind], next(self._seq), kind, payload))

    def _next_job(self) -> Job | None:
        return min(self.jobs, key=lambda j: (j.next_fire, j.label), default=None)

    def next_job_time(self) -> float | None:
        job = self._next_job()
        return None if job is None else job.next_fire

    def advance_clock(self, duration: float) -> list[FiredEvent]:
        if not duration > 0:
            raise DomainError(f"advance_clock needs a positive duration, got {duration}")
        end = self.clock + float(duration)
        fired: list[FiredEvent] = []
        while True:
            t_pending = self._pending[0][0] if self._pending else np.inf
            job = self._next_job()
            t_job = job.next_fire if job is not None else np.inf
            t_probe = self._next_probe if self._next_probe is not None else np.inf
            t = min(t_pending, t_job, t_probe)
            if t > end:
                break
            if t_pending == t:
                at, _, _, kind, payload = heapq.heappop(self._pending)
                self.clock = at
                fired.append(self._fire_pending(kind, payload))
            elif t_probe == t:
                limit = min(t_pending - 1e-9, t_job, end)
                count = int(np.floor((limit - t_probe) / self.probe_period + 1e-9)) + 1
                times = t_probe + self.probe_period * np.arange(count)
                fired.extend(self._fire_probes(times))
                self.clock = float(times[-1])
                self._next_probe = float(times[-1] + self.probe_period)
            else:
                self.clock = t_job
                fired.append(self._fire_job(job))
        self.clock = end
        self.outbox.extend(fired)
        return fired

    def _fire_pending(self, kind: str, payload: Any) -> FiredEvent:
        if kind == "fault":
            self.inject_fault(payload)
            return FiredEvent(self.clock, "fault", payload.to_dict())
        vm = self.vms.get(payload)
        if vm is not None and vm.status in ("restarting", "creating"):
            if vm.hardware_fault:
                vm.status = "shutdown"
            else:
                vm.status = "active"
                self._close_outage(vm.name)
        return FiredEvent(self.clock, "restore", {"name": payload})

    def _fire_probes(self, times: np.ndarray) -> list[FiredEvent]:
        levels = self._probe_levels(times)
        events = []
        for t, level in zip(times.tolist(), levels.tolist()):
            healthy = level >= 0
            if self.tracker is not None:
                self.tracker.record_probe(t, healthy)
            events.append(FiredEvent(t, "probe", {"healthy": healthy, "level": level}))
        return events

    def run_job_now(self, label: str) -> ExecutionFeedback:
        """Execute a scheduled job immediately without moving its next firing."""
        job = next((j for j in self.jobs if j.label == label), None)
        if job is None:
            raise NotFound(f"no scheduled job {label!r}")
        try:
            feedback = self._handlers[job.policy.verb](job.policy, ())
            return feedback() if callable(feedback) else feedback
        except TestbedFault as exc:
            return ExecutionFeedback(False, {"error": exc.code, "detail": exc.detail})

    def _fire_job(self, job: Job) -> FiredEvent:
        try:
            feedback = self._handlers[job.policy.verb](job.policy, ())
            if callable(feedback):
                feedback = feedback()
        except TestbedFault as exc:
            feedback = ExecutionFeedback(False, {"error": exc.code, "detail": exc.detail})
        job.next_fire += job.period
        kind = "healthcheck" if job.policy.verb == "healthcheck" else "job"
        return FiredEvent(self.clock, kind, {"label": job.label, "success": feedback.success})

    def drain(self) -> list[FiredEvent]:
        out, self.outbox = self.outbox, []
        return out

    # ------------------------------------------------------------------ faults

    def _open_outage(self, name: str) -> None:
        spans = self.outages.setdefault(name, [])
        if not spans or spans[-1][1] is not None:
            spans.append([self.clock, None])

    def _close_outage(self, name: str) -> None:
        spans = self.outages.get(name)
        if spans and spans[-1][1] is None:
            spans[-1][1] = self.clock

    def _stop_processes(self, vm: VM) -> None:
        for service in self.services.values():
            if service.member_state.get(vm.name) == "running":
                service.member_state[vm.name] = "configured"

    def inject_fault(self, event: FaultEvent) -> None:
        if event.target not in self.vms:
            raise ConfigurationError(f"fault target {event.target!r} does not exist")
        vm = self.vms[event.target]
        if event.kind in ("shutdown", "hardware"):
            vm.status = "shutdown"
            vm.hardware_fault = event.kind == "hardware"
            self._stop_processes(vm)
            self._open_outage(vm.name)
        elif event.kind == "link_down":
            vm.link_down = True
        else:
            vm.degraded[event.metric] = float(event.value)
        log.debug("fault %s on %s at %.1f", event.kind, event.target, self.clock)

    # ---------------------------------------------------------------- dispatch

    def dispatch(self, policy: Policy, history: Sequence[tuple[Policy, ExecutionFeedback]] = ()) -> ExecutionFeedback:
        """Execute one policy; never raises for handler-level problems."""
        started = self.clock
        handler = self._handlers.get(policy.verb)
        try:
            if handler is None:
                raise BadRequest(f"no handler for verb {policy.verb!r}")
            result = handler(policy, history)
        except TestbedFault as exc:
            result = ExecutionFeedback(False, {"error": exc.code, "detail": exc.detail})
        except (ValueError, TypeError, KeyError, DomainError) as exc:
            result = ExecutionFeedback(False, {"error": "bad_request", "detail": str(exc)})
        duration = self.durations.get(policy.verb, 1.0)
        if duration > 0:
            self.advance_clock(duration)
        feedback = result() if callable(result) else result
        self.trace.append(TraceRecord(policy, feedback, started, duration))
        return feedback

    def _resolve(self, value: Any, history: Sequence[tuple[Policy, ExecutionFeedback]], key: str) -> Any:
        if not isinstance(value, Ref):
            return value
        for policy, feedback in history:
            if policy.label == value.label:
                state = feedback.state
                if isinstance(state, dict) and key in state:
                    return state[key]
                return policy
        raise NotFound(f"reference {value.label} is not in the execution history")

    # ---------------------------------------------------------------- handlers

    def _get(self, policy: Policy, history) -> ExecutionFeedback:
        subject = str(policy.subject)
        if subject == "domain":
            zone = self._zone_param(policy)
            kpi = policy.param("kpi", "availability")
            if kpi != "availability":
                raise BadRequest(f"domain kpi {kpi!r} is not supported")
            return ExecutionFeedback(True, {"zone": zone.name, "availability": format_percent(zone.base_availability)})
        if subject == "switch":
            zone = self._zone_param(policy)
            return ExecutionFeedback(True, {"zone": zone.name, "switch": list(zone.switches)})
        if subject in self.apps:
            app = self.apps[subject]
            kpi = policy.param("kpi", "operational")
            if kpi not in ("target", "operational"):
                raise BadRequest(f"app kpi must be target or operational, got {kpi!r}")
            return ExecutionFeedback(True, [dict(row) for row in app[kpi]])
        if subject in self.vms:
            vm = self.vms[subject]
            return ExecutionFeedback(True, {"name": vm.name, "ip": vm.ip, "size": vm.size, "status": vm.status})
        raise NotFound(f"nothing named {subject!r} to get")

    def _compliance(self, policy: Policy, history) -> ExecutionFeedback:
        zone = self._zone_param(policy)
        kind = policy.param("type", "vm")
        target = policy.param("availability")
        if target is None:
            raise BadRequest("compliance needs an availability parameter")
        target = as_fraction(target)
        count = required_redundancy(target, zone.base_availability)
        zone.compliance_target = target
        return ExecutionFeedback(True, {"type": kind, "count": count})

    def _avail(self, policy: Policy, history) -> ExecutionFeedback:
        if str(policy.subject) != "vm":
            raise BadRequest("avail only reports vm inventory")
        zone = self._zone_param(policy)
        return ExecutionFeedback(True, [{"size": s, "count": c} for s, c in zone.inventory.items()])

    def _create(self, policy: Policy, history) -> ExecutionFeedback:
        if str(policy.subject) != "vm":
            raise BadRequest("create only supports vm")
        zone = self._zone_param(policy)
        count = as_int(policy.param("count", "1"))
        size = str(policy.param("size", "small"))
        names = [str(n) for n in as_list(policy.param("name", ()))]
        if len(names) != count:
            raise BadRequest(f"count={count} but {len(names)} names given")
        if size not in zone.inventory:
            raise BadRequest(f"unknown size {size!r}")
        clash = [n for n in names if n in self.vms]
        if clash:
            raise BadRequest(f"vm names already in use: {clash}")
        if zone.inventory[size] < count:
            raise NoCapacity(f"{zone.name} has {zone.inventory[size]} {size} vms, {count} requested")
        zone.inventory[size] -= count
        rows = []
        for n in names:
            vm = VM(n, zone.name, zone.allocate_ip(), size, str(policy.param("image", "ubuntu")), created_at=self.clock)
            self.vms[n] = vm
            rows.append({"name": n, "ip": vm.ip, "size": size})
        return ExecutionFeedback(True, rows)

    def _check_ping(self, vm: VM) -> dict[str, bool]:
        ssh = vm.status == "active"
        return {"ssh": ssh, "ping": ssh and not vm.link_down}

    def _validate(self, policy: Policy, history) -> ExecutionFeedback:
        vms = [self.vm(n) for n in as_list(policy.subject)]
        results = []
        for vm in vms:
            r = self._check_ping(vm)
            vm.validated = r["ssh"] and r["ping"]
            results.append(r)
        ok = all(vm.validated for vm in vms)
        if isinstance(policy.subject, tuple):
            return ExecutionFeedback(ok, results)
        return ExecutionFeedback(ok, {} if ok else results[0])

    def _members(self, policy: Policy) -> list[VM]:
        return [self.vm(n) for n in as_list(policy.subject)]

    def _per_member(self, policy: Policy, success: bool = True) -> ExecutionFeedback:
        if isinstance(policy.subject, tuple):
            return ExecutionFeedback(success, [{} for _ in policy.subject])
        return ExecutionFeedback(success, {})

    def _deploy(self, policy: Policy, history) -> ExecutionFeedback:
        vms = self._members(policy)
        name = policy.param("name") or policy.param("service")
        if name is None:
            raise BadRequest("deploy needs a service name")
        name = str(name)
        unvalidated = [vm.name for vm in vms if not vm.validated]
        if unvalidated:
            raise BadRequest(f"deploy on unvalidated vms {unvalidated}")
        service = self.services.get(name)
        if service is None:
            zone = vms[0].zone
            service = Service(
                name,
                kind=str(policy.param("service", "collector")),
                type=str(policy.param("type", "netflow")),
                zone=zone,
                availability_target=self.zones[zone].compliance_target,
            )
            self.services[name] = service
        for vm in vms:
            if vm.name not in service.members:
                service.members.append(vm.name)
            service.member_state[vm.name] = "deployed"
        return self._per_member(policy)

    def _service_param(self, policy: Policy) -> Service:
        name = policy.param("service")
        if name is None:
            raise BadRequest(f"{policy.verb} needs a service parameter")
        if str(name) not in self.services:
            raise BadRequest(f"service {name} has not been deployed")
        return self.services[str(name)]

    def _configure(self, policy: Policy, history) -> ExecutionFeedback:
        vms = self._members(policy)
        service = self._service_param(policy)
        missing = [vm.name for vm in vms if vm.name not in service.member_state]
        if missing:
            raise BadRequest(f"{missing} are not deployed members of {service.name}")
        source = policy.param("source")
        if source is not None:
            resolved = self._resolve(source, history, "switch")
            service.config["source"] = list(resolved) if isinstance(resolved, (list, tuple)) else [str(resolved)]
        for vm in vms:
            if service.member_state[vm.name] == "deployed":
                service.member_state[vm.name] = "configured"
        return self._per_member(policy)

    def _start(self, policy: Policy, history) -> ExecutionFeedback:
        vms = self._members(policy)
        service = self._service_param(policy)
        unready = [vm.name for vm in vms if service.member_state.get(vm.name) not in ("configured", "running")]
        if unready:
            raise BadRequest(f"{unready} must be deployed and configured before start")
        down = [vm.name for vm in vms if vm.status != "active"]
        if down:
            raise BadRequest(f"{down} are not active")
        for vm in vms:
            service.member_state[vm.name] = "running"
        service.status = "active"
        if self.probe_start is None:
            self.probe_start = self.clock
            self._next_probe = self.clock + self.probe_period
        return self._per_member(policy)

    def _healthcheck(self, policy: Policy, history) -> ExecutionFeedback:
        service = self.service(policy.subject)
        output = str(policy.param("output", "App_1"))
        snapshot, metrics = self.evaluate_service(service.name)
        availability = self.tracker.availability() if self.tracker is not None else 1.0
        target_avail = service.availability_target if service.availability_target is not None else 1.0
        self.apps[output] = {
            "service": service.name,
            "name": str(policy.param("name", "health")),
            "time": self.clock,
            "snapshot": snapshot,
            "metrics": metrics,
            "availability": availability,
            "target": [
                {"name": service.name, "availability": format_percent(target_avail)},
                {"name": service.name, "health": format_percent(1.0)},
            ],
            "operational": [
                {"name": service.name, "availability": format_percent(availability)},
                {"name": service.name, "health": format_percent(snapshot.percent / 100.0)},
            ],
        }
        return ExecutionFeedback(True, [{} for _ in service.members])

    def _schedule(self, policy: Policy, history) -> ExecutionFeedback:
        ref = policy.subject
        if not isinstance(ref, Ref):
            raise BadRequest("schedule subject must reference an earlier policy")
        target = next((p for p, _ in history if p.label == ref.label), None)
        if target is None:
            raise NotFound(f"reference {ref.label} is not in the execution history")
        period = parse_frequency(str(policy.param("frequency", "hourly")))
        self.jobs = [j for j in self.jobs if j.label != ref.label]
        self.jobs.append(Job(ref.label, target, period, self.clock + period))
        return ExecutionFeedback(True, {})

    def _restart(self, policy: Policy, history):
        vm = self.vm(policy.subject)
        vm.status = "restarting"
        self._stop_processes(vm)
        self._open_outage(vm.name)
        self._push(self.clock + self.durations["restart"], "restore", vm.name)
        return lambda: ExecutionFeedback(vm.status == "active", {"name": vm.name, "status": vm.status})

    def _recreate(self, policy: Policy, history):
        vm = self.vm(policy.subject)
        zone = self.zones[vm.zone]
        zone.inventory[vm.size] += 1
        zone.inventory[vm.size] -= 1
        for service in self.services.values():
            service.member_state.pop(vm.name, None)
        self._open_outage(vm.name)
        fresh = VM(vm.name, vm.zone, zone.allocate_ip(), vm.size, vm.image, status="creating", created_at=self.clock)
        fresh.rng = vm.rng
        self.vms[vm.name] = fresh
        self._push(self.clock + self.durations["recreate"], "restore", vm.name)
        return lambda: ExecutionFeedback(
            fresh.status == "active", {"name": fresh.name, "ip": fresh.ip, "status": fresh.status}
        )

    # --------------------------------------------------------------- snapshots

    def inventory_total(self, zone: str) -> dict[str, int]:
        """Free inventory plus VMs in use, per size; constant across create/recreate."""
        z = self.zone(zone)
        totals = dict(z.inventory)
        for vm in self.vms.values():
            if vm.zone == zone:
                totals[vm.size] = totals.get(vm.size, 0) + 1
        return totals

    def snapshot(self) -> dict:
        return {
            "clock": self.clock,
            "zones": {n: {"inventory": dict(z.inventory), "switches": list(z.switches)} for n, z in self.zones.items()},
            "vms": {n: {"ip": v.ip, "size": v.size, "status": v.status, "image": v.image} for n, v in self.vms.items()},
            "services": {
                n: {"type": s.type, "members": list(s.members), "status": s.status, "config": dict(s.config)}
                for n, s in self.services.items()
            },
            "schedules": [{"label": j.label, "period": j.period, "next_fire": j.next_fire} for j in self.jobs],
        }


def dispatch(policy: Policy, state: Testbed, history=()) -> ExecutionFeedback:
    return state.dispatch(policy, history)


def inject_fault(event: FaultEvent, state: Testbed) -> Testbed:
    state.inject_fault(event)
    return state


def advance_clock(duration: float, state: Testbed) -> list[FiredEvent]:
    return state.advance_clock(duration)


def sample_metrics(resource: str, state: Testbed) -> ResourceMetrics:
    return state.sample_metrics(resource)
