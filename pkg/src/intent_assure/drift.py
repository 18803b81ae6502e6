"""Delta vectors, distance, squared error and its gradient between operational and target KPIs."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, PairingError, SingularityError
from .kpi import NORMAL, KpiVector, QuantBands, quantize3


@dataclass(frozen=True)
class Target:
    """Point target when ``low == high``, otherwise an inclusive band."""

    low: float
    high: float

    def __post_init__(self):
        if self.low > self.high:
            raise DomainError(f"target band inverted: {self.low} > {self.high}")

    @classmethod
    def point(cls, value: float) -> Target:
        return cls(float(value), float(value))

    @property
    def is_point(self) -> bool:
        return self.low == self.high

    def effective(self, value: float) -> float:
        """The edge (or point) the value is measured against."""
        if value > self.high:
            return self.high
        if value < self.low:
            return self.low
        return value

    def to_json(self):
        return self.low if self.is_point else [self.low, self.high]


class TargetSpec(dict):
    """Ordered name -> :class:`Target` mapping.

    Values passed to the constructor may be a ``Target``, a number (point
    target) or a ``(low, high)`` pair.
    """

    def __init__(self, targets: Mapping[str, object] | Iterable[tuple[str, object]] = ()):
        super().__init__()
        items = targets.items() if isinstance(targets, Mapping) else targets
        for name, spec in items:
            self[name] = _as_target(spec)

    def to_json(self) -> dict:
        return {name: t.to_json() for name, t in self.items()}


def _as_target(spec) -> Target:
    if isinstance(spec, Target):
        return spec
    if isinstance(spec, (int, float)):
        return Target.point(spec)
    low, high = spec
    return Target(float(low), float(high))


@dataclass(frozen=True)
class DeltaVector:
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


@dataclass(frozen=True)
class GradientVector:
    """Raw gradient (2 * delta) plus an optional dimensionless scaled variant.

    ``domain`` is ``"value"`` for gradients over raw KPI values and
    ``"level"`` for gradients over 3-ary quantized levels. ``singular`` lists
    KPIs whose scaled component is an infinite sentinel.
    """

    names: tuple[str, ...]
    raw: tuple[float, ...]
    scaled: tuple[float, ...] | None = None
    domain: str = "value"
    singular: tuple[str, ...] = ()

    def as_dict(self, scaled: bool = False) -> dict[str, float]:
        values = self.scaled if scaled else self.raw
        if values is None:
            raise ValueError("gradient has no scaled component")
        return dict(zip(self.names, values))


def _pair(operational: KpiVector, target: Mapping[str, Target]) -> list[tuple[str, float, Target]]:
    op_names = list(operational.names)
    missing_target = [n for n in op_names if n not in target]
    missing_op = [n for n in target if n not in operational]
    if missing_target or missing_op:
        raise PairingError(missing_target, missing_op)
    return [(kpi.name, kpi.value, target[kpi.name]) for kpi in operational]


def delta_vector(operational: KpiVector, target: Mapping[str, Target]) -> DeltaVector:
    pairs = _pair(operational, target)
    return DeltaVector(
        tuple(name for name, _, _ in pairs),
        tuple(float(value - t.effective(value)) for _, value, t in pairs),
    )


def euclidean_distance(delta: DeltaVector | Sequence[float]) -> float:
    return math.sqrt(error(delta))


def error(delta: DeltaVector | Sequence[float]) -> float:
    return float(math.fsum(d * d for d in delta))


def gradient(operational: KpiVector, target: Mapping[str, Target]) -> GradientVector:
    """Partial derivatives of the squared error; positive means reduce the KPI."""
    delta = delta_vector(operational, target)
    return GradientVector(delta.names, tuple(2.0 * d for d in delta.values))


def scale_by_edge(delta: float, edge: float) -> float:
    return 2.0 * delta / edge


def scaled_gradient(
    operational: KpiVector,
    target: Mapping[str, Target],
    bands: Mapping[str, QuantBands],
    scaling: Callable[[float, float], float] = scale_by_edge,
    strict: bool = False,
) -> GradientVector:
    """Gradient with normal-classified KPIs zeroed and the rest scaled.

    Scaling defaults to dividing ``2 * delta`` by the effective target edge.
    A zero edge with a non-zero delta yields ``copysign(inf, delta)`` and the
    KPI is listed in ``singular``; with ``strict=True`` it raises instead.
    """
    pairs = _pair(operational, target)
    raw, scaled, singular = [], [], []
    for name, value, t in pairs:
        if name not in bands:
            raise ConfigurationError(f"no quantization bands configured for KPI {name!r}")
        edge = t.effective(value)
        d = value - edge
        raw.append(2.0 * d)
        if quantize3(value, bands[name], name) == NORMAL or d == 0.0:
            scaled.append(0.0)
        elif edge == 0.0:
            if strict:
                raise SingularityError(f"KPI {name!r}: cannot scale delta {d} by a zero target edge")
            scaled.append(math.copysign(math.inf, d))
            singular.append(name)
        else:
            scaled.append(float(scaling(d, edge)))
    names = tuple(n for n, _, _ in pairs)
    return GradientVector(names, tuple(raw), tuple(scaled), "value", tuple(singular))


def level_drift(
    operational: KpiVector,
    bands: Mapping[str, QuantBands],
    target_level: int = NORMAL,
) -> tuple[DeltaVector, GradientVector]:
    """Delta and gradient computed over 3-ary levels against a point target level."""
    names, deltas = [], []
    for kpi in operational:
        if kpi.name not in bands:
            raise ConfigurationError(f"no quantization bands configured for KPI {kpi.name!r}")
        names.append(kpi.name)
        deltas.append(float(quantize3(kpi.value, bands[kpi.name], kpi.name) - target_level))
    names = tuple(names)
    return DeltaVector(names, tuple(deltas)), GradientVector(names, tuple(2.0 * d for d in deltas), domain="level")


def levels_gradient(levels: Mapping[str, int], target_level: int = NORMAL) -> GradientVector:
    """Level-domain gradient for already-quantized levels (e.g. sub-service health)."""
    names = tuple(levels)
    return GradientVector(names, tuple(2.0 * (levels[n] - target_level) for n in names), domain="level")


def _display(x: float) -> float | str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return round(x, 2)


def _json_number(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class DriftReport:
    delta: DeltaVector
    distance: float
    error: float
    gradient: GradientVector
    levels: Mapping[str, int] = field(default_factory=dict)
    is_zero_drift: bool = True

    @property
    def names(self) -> tuple[str, ...]:
        return self.delta.names

    def to_dict(self) -> dict:
        """Full-precision numbers plus 2-decimal ``display`` fields."""
        out = {
            "domain": self.gradient.domain,
            "kpis": list(self.names),
            "delta": dict(zip(self.names, self.delta.values)),
            "distance": self.distance,
            "error": self.error,
            "gradient": dict(zip(self.names, self.gradient.raw)),
            "levels": dict(self.levels),
            "is_zero_drift": self.is_zero_drift,
            "display": {
                "distance": round(self.distance, 2),
                "gradient": {n: round(g, 2) for n, g in zip(self.names, self.gradient.raw)},
            },
        }
        if self.gradient.scaled is not None:
            out["scaled_gradient"] = {n: _json_number(g) for n, g in zip(self.names, self.gradient.scaled)}
            out["display"]["scaled_gradient"] = {n: _display(g) for n, g in zip(self.names, self.gradient.scaled)}
            out["singular"] = list(self.gradient.singular)
        return out


def drift_report(
    operational: KpiVector,
    target: Mapping[str, Target],
    bands: Mapping[str, QuantBands],
    scaling: Callable[[float, float], float] = scale_by_edge,
) -> DriftReport:
    delta = delta_vector(operational, target)
    grad = scaled_gradient(operational, target, bands, scaling)
    err = error(delta)
    levels = {kpi.name: quantize3(kpi.value, bands[kpi.name], kpi.name) for kpi in operational}
    return DriftReport(
        delta=delta,
        distance=math.sqrt(err),
        error=err,
        gradient=grad,
        levels=levels,
        is_zero_drift=all(d == 0.0 for d in delta.values),
    )


def error_series(samples, names: Sequence[str], target: Mapping[str, Target]) -> np.ndarray:
    """Squared error for each row of an ``(n, k)`` sample matrix."""
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    lows = np.array([target[n].low for n in names], dtype=np.float64)
    highs = np.array([target[n].high for n in names], dtype=np.float64)
    return _kernels.squared_error(samples, lows, highs)


def delta_series(samples, names: Sequence[str], target: Mapping[str, Target]) -> np.ndarray:
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    lows = np.array([target[n].low for n in names], dtype=np.float64)
    highs = np.array([target[n].high for n in names], dtype=np.float64)
    return _kernels.band_delta(samples, lows, highs)
