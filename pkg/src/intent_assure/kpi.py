"""KPI values, threshold bands, 9-ary/3-ary quantization and worst-case assessment."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError


class Unit(str, Enum):
    PERCENT = "percent"
    FRACTION = "fraction"
    COUNT = "count"
    HOURS = "hours"
    MINUTES = "minutes"
    LEVEL = "level"


_UNIT_RANGE = {
    Unit.PERCENT: (0.0, 100.0),
    Unit.FRACTION: (0.0, 1.0),
    Unit.LEVEL: (-4.0, 4.0),
}

NINE_LABELS = {
    -4: "Very Low",
    -3: "Low",
    -2: "Slightly Low",
    -1: "Slightly < Normal",
    0: "Normal",
    1: "Slightly > Normal",
    2: "Slightly High",
    3: "High",
    4: "Very High",
}
THREE_LABELS = {-1: "Critical", 0: "Warning", 1: "Normal"}

CRITICAL, WARNING, NORMAL = -1, 0, 1

# index = nine + 4
_NINE_TO_THREE = (-1, -1, 0, 0, 1, 0, 0, -1, -1)


@dataclass(frozen=True)
class KpiValue:
    name: str
    value: float
    unit: Unit = Unit.PERCENT

    def __post_init__(self):
        object.__setattr__(self, "unit", Unit(self.unit))
        bounds = _UNIT_RANGE.get(self.unit)
        if bounds is not None and not bounds[0] <= self.value <= bounds[1]:
            raise DomainError(
                f"KPI {self.name!r}: {self.value} outside [{bounds[0]}, {bounds[1]}] for unit {self.unit.value}"
            )


@dataclass(frozen=True)
class KpiVector:
    """Ordered, name-unique collection of KPI values."""

    entries: tuple[KpiValue, ...]
    kind: str = "operational"

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.kind not in ("operational", "target"):
            raise ConfigurationError(f"KpiVector kind must be operational or target, got {self.kind!r}")
        names = [e.name for e in self.entries]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ConfigurationError(f"duplicate KPI names: {dupes}")

    @classmethod
    def from_mapping(
        cls,
        values: Mapping[str, float],
        kind: str = "operational",
        unit: Unit | str | Mapping[str, Unit | str] = Unit.PERCENT,
    ) -> KpiVector:
        if isinstance(unit, Mapping):
            return cls(tuple(KpiValue(k, float(v), unit[k]) for k, v in values.items()), kind)
        return cls(tuple(KpiValue(k, float(v), unit) for k, v in values.items()), kind)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def __iter__(self) -> Iterator[KpiValue]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, name: str) -> KpiValue:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(e.name == name for e in self.entries)

    def as_dict(self) -> dict[str, float]:
        return {e.name: e.value for e in self.entries}


@dataclass(frozen=True)
class QuantBands:
    """Nine contiguous bands over ``[low, high]``.

    ``lower_edges`` are the four cut points below the normal band and
    ``upper_edges`` the four above it. A value sitting exactly on a cut point
    belongs to the less severe neighbour, so the normal band
    ``[lower_edges[-1], upper_edges[0]]`` is closed at both ends. Equal
    consecutive edges give empty (degenerate) bands.
    """

    lower_edges: tuple[float, float, float, float]
    upper_edges: tuple[float, float, float, float]
    low: float = 0.0
    high: float = 100.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lower_edges", tuple(float(x) for x in self.lower_edges))
        object.__setattr__(self, "upper_edges", tuple(float(x) for x in self.upper_edges))
        if len(self.lower_edges) != 4 or len(self.upper_edges) != 4:
            raise ConfigurationError(f"bands {self.name!r}: need exactly 4 lower and 4 upper edges")
        chain = (self.low, *self.lower_edges, *self.upper_edges, self.high)
        if any(b < a for a, b in zip(chain, chain[1:])):
            raise ConfigurationError(f"bands {self.name!r}: edges must be non-decreasing within [low, high]: {chain}")

    @property
    def normal(self) -> tuple[float, float]:
        return self.lower_edges[-1], self.upper_edges[0]

    def intervals(self) -> list[tuple[int, float, float]]:
        """(label, start, end) for all nine bands, including empty ones."""
        cuts = (self.low, *self.lower_edges, *self.upper_edges, self.high)
        return [(label, cuts[i], cuts[i + 1]) for i, label in enumerate(range(-4, 5))]

    def with_name(self, name: str) -> QuantBands:
        return QuantBands(self.lower_edges, self.upper_edges, self.low, self.high, name)

    def to_dict(self) -> dict:
        return {
            "lower_edges": list(self.lower_edges),
            "upper_edges": list(self.upper_edges),
            "low": self.low,
            "high": self.high,
        }

    @classmethod
    def from_dict(cls, data: Mapping, name: str = "") -> QuantBands:
        return cls(
            tuple(data["lower_edges"]),
            tuple(data["upper_edges"]),
            float(data.get("low", 0.0)),
            float(data.get("high", 100.0)),
            name,
        )


# Midpoints between neighbouring sample values of the reference quantization table.
DEFAULT_UTILIZATION_BANDS = QuantBands((12.5, 22.5, 32.5, 40.0), (70.0, 77.5, 82.5, 87.5))

# 100 is normal, anything lower is -4.
BINARY_STATUS_BANDS = QuantBands((100.0,) * 4, (100.0,) * 4)


def quantize9(value: float, bands: QuantBands, name: str = "") -> int:
    kpi = name or bands.name or "<unnamed>"
    if not bands.low <= value <= bands.high:
        raise DomainError(f"KPI {kpi!r}: value {value} outside band domain [{bands.low}, {bands.high}]")
    label = -4
    for edge in bands.lower_edges:
        if value >= edge:
            label += 1
    for edge in bands.upper_edges:
        if value > edge:
            label += 1
    return label


def map9to3(nine: int) -> int:
    if isinstance(nine, bool) or int(nine) != nine or not -4 <= nine <= 4:
        raise ValueError(f"9-ary label must be an integer in [-4, 4], got {nine!r}")
    return _NINE_TO_THREE[int(nine) + 4]


def quantize3(value: float, bands: QuantBands, name: str = "") -> int:
    return map9to3(quantize9(value, bands, name))


def kleene_assess(kpis: KpiVector | Iterable[KpiValue], bands: Mapping[str, QuantBands]) -> int:
    """Worst-case three-valued assessment: the minimum 3-ary level."""
    levels = []
    for kpi in kpis:
        if kpi.name not in bands:
            raise ConfigurationError(f"no quantization bands configured for KPI {kpi.name!r}")
        levels.append(quantize3(kpi.value, bands[kpi.name], kpi.name))
    if not levels:
        raise ConfigurationError("cannot assess an empty KPI vector")
    return min(levels)


def kleene_min(levels: Iterable[int]) -> int:
    levels = list(levels)
    if not levels:
        raise ConfigurationError("cannot compose an empty set of levels")
    return min(levels)


def quantize9_array(values, bands: QuantBands) -> np.ndarray:
    """Vectorised :func:`quantize9`; raises if any value leaves the domain."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and (values.min() < bands.low or values.max() > bands.high):
        bad = values[(values < bands.low) | (values > bands.high)][0]
        raise DomainError(f"KPI {bands.name or '<unnamed>'!r}: value {bad} outside band domain [{bands.low}, {bands.high}]")
    lower = np.asarray(bands.lower_edges, dtype=np.float64)
    upper = np.asarray(bands.upper_edges, dtype=np.float64)
    flat = values.reshape(-1, 1)
    out = _kernels.quantize9_matrix(flat, lower.reshape(1, 4), upper.reshape(1, 4))
    return out.reshape(values.shape)


def edge_matrices(bands: Mapping[str, QuantBands], names: Iterable[str]) -> tuple[np.ndarray, np.ndarray]:
    """Stack lower/upper edges for ``names`` into (k, 4) arrays for the batch kernels."""
    names = list(names)
    missing = [n for n in names if n not in bands]
    if missing:
        raise ConfigurationError(f"no quantization bands configured for KPIs {missing}")
    lower = np.array([bands[n].lower_edges for n in names], dtype=np.float64)
    upper = np.array([bands[n].upper_edges for n in names], dtype=np.float64)
    return lower, upper
