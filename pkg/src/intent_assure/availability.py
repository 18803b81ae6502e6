"""Parallel redundancy sizing, probe-driven downtime tracking and the intent-health predicate.

Durations are plain floats in seconds unless a function says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, SequencingError

MINUTE = 60.0
HOUR = 3600.0


def _open_fraction(x: float, what: str) -> float:
    if not 0.0 < x < 1.0:
        raise DomainError(f"{what} must lie strictly between 0 and 1, got {x}")
    return float(x)


def combined_availability(per_resource: float, n: int) -> float:
    """Availability of ``n`` independent redundant resources."""
    _open_fraction(per_resource, "per-resource availability")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"redundancy must be a positive integer, got {n!r}")
    return 1.0 - (1.0 - per_resource) ** int(n)


def required_redundancy(target: float, per_resource: float) -> int:
    """Smallest ``n`` whose combined availability reaches ``target``."""
    if target >= 1.0:
        raise DomainError("an availability target of 1 cannot be met by finite redundancy")
    _open_fraction(target, "availability target")
    _open_fraction(per_resource, "per-resource availability")
    if per_resource >= target:
        return 1
    n = max(1, math.ceil(math.log(1.0 - target) / math.log(1.0 - per_resource)) - 1)
    while n > 1 and combined_availability(per_resource, n - 1) >= target:
        n -= 1
    while combined_availability(per_resource, n) < target:
        n += 1
    return n


def max_downtime(target: float, t_planned: float) -> float:
    """Largest downtime, in the unit of ``t_planned``, that keeps availability at ``target``."""
    _open_fraction(target, "availability target")
    return t_planned * (1.0 - target)


def intent_health(k_as: float, threshold: float) -> int:
    return 1 if k_as >= threshold else 0


@dataclass
class AvailabilityTracker:
    """Counts downtime from periodic health probes.

    Each unhealthy probe charges one full ``probe_period`` of downtime, so
    outages shorter than a period still cost one period.
    """

    t_planned: float
    probe_period: float = MINUTE
    t_down: float = 0.0
    probes: list[tuple[float, bool]] = field(default_factory=list)

    def __post_init__(self):
        if self.t_planned <= 0:
            raise DomainError("t_planned must be positive")
        if self.probe_period <= 0:
            raise DomainError("probe_period must be positive")

    @property
    def last_timestamp(self) -> float | None:
        return self.probes[-1][0] if self.probes else None

    @property
    def unhealthy_probes(self) -> int:
        return sum(1 for _, ok in self.probes if not ok)

    def record_probe(self, timestamp: float, healthy: bool) -> AvailabilityTracker:
        last = self.last_timestamp
        if last is not None and timestamp <= last:
            raise SequencingError(f"probe at {timestamp} does not advance past {last}")
        self.probes.append((float(timestamp), bool(healthy)))
        if not healthy:
            self.t_down = min(self.t_down + self.probe_period, self.t_planned)
        return self

    def availability(self) -> float:
        return service_availability(self)

    def snapshot(self) -> dict:
        return {
            "t_planned_s": self.t_planned,
            "t_down_s": self.t_down,
            "probe_period_s": self.probe_period,
            "probes": len(self.probes),
            "unhealthy_probes": self.unhealthy_probes,
            "availability": service_availability(self),
        }


def record_probe(tracker: AvailabilityTracker, timestamp: float, healthy: bool) -> AvailabilityTracker:
    return tracker.record_probe(timestamp, healthy)


def service_availability(tracker: AvailabilityTracker) -> float:
    if tracker.t_planned <= 0:
        raise DomainError("t_planned must be positive")
    return (tracker.t_planned - tracker.t_down) / tracker.t_planned


def format_percent(fraction: float, decimals: int = 2) -> str:
    """Percent string truncated (never rounded up), e.g. 0.99998 -> '99.99%'."""
    scale = 10 ** decimals
    value = math.floor(round(fraction * 100 * scale, 6)) / scale
    text = f"{value:.{decimals}f}".rstrip("0").rstrip(".")
    return f"{text}%"
