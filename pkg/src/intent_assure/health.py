"""Hierarchical health KPIs: resource, agents, sub-service, composite service."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .drift import Target, TargetSpec
from .errors import ConfigurationError, DomainError
from .kpi import (
    BINARY_STATUS_BANDS,
    CRITICAL,
    DEFAULT_UTILIZATION_BANDS,
    NORMAL,
    WARNING,
    KpiVector,
    QuantBands,
    edge_matrices,
    kleene_assess,
)

RESOURCE_KPIS = ("u_cpu", "u_ram", "u_storage", "s_net", "s_r")
LEVELS = (CRITICAL, WARNING, NORMAL)

PolicyFunction = Callable[[Sequence[int]], int]


def default_resource_bands() -> dict[str, QuantBands]:
    return {
        "u_cpu": DEFAULT_UTILIZATION_BANDS.with_name("u_cpu"),
        "u_ram": DEFAULT_UTILIZATION_BANDS.with_name("u_ram"),
        "u_storage": DEFAULT_UTILIZATION_BANDS.with_name("u_storage"),
        "s_net": BINARY_STATUS_BANDS.with_name("s_net"),
        "s_r": BINARY_STATUS_BANDS.with_name("s_r"),
    }


def default_resource_targets() -> TargetSpec:
    return TargetSpec(
        {
            "u_cpu": Target(40.0, 70.0),
            "u_ram": Target(40.0, 70.0),
            "u_storage": Target(40.0, 70.0),
            "s_net": Target.point(100.0),
            "s_r": Target.point(100.0),
        }
    )


@dataclass(frozen=True)
class ResourceMetrics:
    cpu_util: float
    ram_util: float
    storage_util: float
    net_status: float = 100.0
    resource_status: float = 100.0

    def __post_init__(self):
        for name, value in zip(RESOURCE_KPIS, self.as_tuple()):
            if not 0.0 <= value <= 100.0:
                raise DomainError(f"{name} = {value} outside [0, 100]")
        for name, value in (("s_net", self.net_status), ("s_r", self.resource_status)):
            if value not in (0.0, 100.0):
                raise DomainError(f"{name} is a binary status, got {value}")

    @classmethod
    def dead(cls) -> ResourceMetrics:
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.cpu_util, self.ram_util, self.storage_util, self.net_status, self.resource_status)

    def as_kpis(self, kind: str = "operational") -> KpiVector:
        return KpiVector.from_mapping(dict(zip(RESOURCE_KPIS, self.as_tuple())), kind)

    def to_dict(self) -> dict[str, float]:
        return dict(zip(RESOURCE_KPIS, self.as_tuple()))


def _check_level(level: int, what: str = "level") -> int:
    if level not in LEVELS:
        raise DomainError(f"{what} must be one of -1, 0, 1; got {level!r}")
    return int(level)


def _compose(levels: Iterable[int], policy: PolicyFunction, what: str) -> int:
    levels = [_check_level(lv, what) for lv in levels]
    if not levels:
        raise ConfigurationError(f"{what}: cannot compose an empty list")
    return _check_level(policy(levels), f"{what} policy result")


def resource_health(metrics: ResourceMetrics, bands: Mapping[str, QuantBands] | None = None) -> int:
    """Kleene conjunction over quantized utilisations and binary statuses."""
    return kleene_assess(metrics.as_kpis(), bands or default_resource_bands())


def resource_health_pct(level: int) -> float:
    # +1 is fully healthy; warning is shown halfway, critical as zero
    return {NORMAL: 100.0, WARNING: 50.0, CRITICAL: 0.0}[_check_level(level)]


def resource_health_batch(samples, bands: Mapping[str, QuantBands] | None = None) -> np.ndarray:
    """Resource health level for each row of an ``(n, 5)`` metrics matrix."""
    lower, upper = edge_matrices(bands or default_resource_bands(), RESOURCE_KPIS)
    return _kernels.resource_levels(np.ascontiguousarray(samples, dtype=np.float64), lower, upper)


def composite_resource_health(levels: Sequence[int], policy: PolicyFunction = min) -> int:
    return _compose(levels, policy, "resource health")


@dataclass(frozen=True)
class AgentStatus:
    """Health inputs for one monitored device as seen from one collector."""

    resource: int = NORMAL
    software: int = 1
    link: int = 1

    def __post_init__(self):
        _check_level(self.resource, "agent resource health")
        if self.software not in (0, 1) or self.link not in (0, 1):
            raise DomainError("agent software and link health are binary (0 or 1)")

    @property
    def level(self) -> int:
        return min(self.resource, self.software, self.link)


@dataclass(frozen=True)
class AgentHealthInputs:
    agents: tuple[AgentStatus, ...]
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))

    @property
    def good(self) -> int:
        return sum(1 for a in self.agents if a.level == NORMAL)

    @property
    def bad(self) -> int:
        return len(self.agents) - self.good


def relative_average_q(ratio: float, high: float = 0.9, mid: float = 0.5) -> int:
    if ratio >= high:
        return NORMAL
    if ratio >= mid:
        return WARNING
    return CRITICAL


def agent_health(
    inputs: AgentHealthInputs,
    policy: str = "strict",
    quantizer: Callable[[float], int] = relative_average_q,
) -> int | bool:
    """Aggregate agent health for one sub-service.

    ``strict`` takes the worst per-agent minimum. ``relative_average`` feeds
    the per-agent minima summed and divided by the agent count to
    ``quantizer``. ``count_match`` returns the boolean ``good - bad >= k``.
    """
    if not inputs.agents:
        raise ConfigurationError("agent health needs at least one agent")
    minima = [a.level for a in inputs.agents]
    if policy == "strict":
        return min(minima)
    if policy == "relative_average":
        return _check_level(quantizer(sum(minima) / len(minima)), "relative average")
    if policy == "count_match":
        if inputs.k is None or inputs.k < 1:
            raise ConfigurationError("count_match needs a positive threshold k")
        return inputs.good - inputs.bad >= inputs.k
    raise ConfigurationError(f"unknown agent health policy {policy!r}")


def subservice_health(resource: int, software: int, agents: int) -> int:
    return min(_check_level(resource, "resource"), _check_level(software, "software"), _check_level(agents, "agents"))


def normalize_health(level: int) -> int:
    return 0 if _check_level(level) == CRITICAL else 1


def service_health_pct(subservice_levels: Sequence[int]) -> float:
    if not subservice_levels:
        raise ConfigurationError("service health needs at least one sub-service")
    return sum(normalize_health(lv) for lv in subservice_levels) / len(subservice_levels) * 100.0


def composite_service_health(k_hr: int, k_hsw: int, k_hnet: int, policy: PolicyFunction = min) -> int:
    return _compose((k_hr, k_hsw, k_hnet), policy, "service health")


@dataclass(frozen=True)
class SubServiceHealth:
    name: str
    resource: int
    software: int
    agents: int

    @property
    def combined(self) -> int:
        return subservice_health(self.resource, self.software, self.agents)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "h_r": self.resource,
            "h_sw": self.software,
            "h_a": self.agents,
            "h_s": self.combined,
        }


@dataclass(frozen=True)
class ServiceHealthSnapshot:
    k_hr: int
    k_hsw: int
    k_hnet: int
    combined: int
    percent: float
    subservices: tuple[SubServiceHealth, ...] = ()

    def to_dict(self) -> dict:
        return {
            "k_Hr": self.k_hr,
            "k_Hsw": self.k_hsw,
            "k_Hnet": self.k_hnet,
            "k_Hs": self.combined,
            "k_Hs_pct": self.percent,
            "subservices": [s.to_dict() for s in self.subservices],
        }


def assess_service(subservices: Sequence[SubServiceHealth], policy: PolicyFunction = min) -> ServiceHealthSnapshot:
    if not subservices:
        raise ConfigurationError("service has no sub-services")
    k_hr = composite_resource_health([s.resource for s in subservices], policy)
    k_hsw = _compose([s.software for s in subservices], policy, "software health")
    k_hnet = _compose([s.agents for s in subservices], policy, "network health")
    return ServiceHealthSnapshot(
        k_hr=k_hr,
        k_hsw=k_hsw,
        k_hnet=k_hnet,
        combined=composite_service_health(k_hr, k_hsw, k_hnet, policy),
        percent=service_health_pct([s.combined for s in subservices]),
        subservices=tuple(subservices),
    )
