"""Scenario files: one JSON document per reproducible run.

A scenario names the intent, the zones the testbed starts with, optional
band overrides, the corrective-action registry, a fault schedule and run
settings. Bundled scenarios can be referenced by name instead of path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ScenarioError
from .health import default_resource_bands
from .kpi import QuantBands
from .loop import SERVICE_BANDS
from .planner import PLANNER_MODES
from .planner.core import FAILURE_KINDS, ActionCandidate
from .testbed import FAULT_KINDS, AgentSpec, Testbed, Zone

BUNDLED = ("paper-usecase", "paper-usecase-recreate", "paper-usecase-hardware", "no-faults")

_BANDS = {
    "type": "object",
    "required": ["lower_edges", "upper_edges"],
    "properties": {
        "lower_edges": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
        "upper_edges": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
        "low": {"type": "number"},
        "high": {"type": "number"},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["intent", "zones"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "intent": {"type": "string", "minLength": 1},
        "zones": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "base_availability": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    "switches": {"type": "array", "items": {"type": "string"}},
                    "inventory": {
                        "type": "object",
                        "additionalProperties": {"type": "integer", "minimum": 0},
                    },
                    "agents": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["name"],
                            "additionalProperties": False,
                            "properties": {
                                "name": {"type": "string"},
                                "resource": {"enum": [-1, 0, 1]},
                                "software": {"enum": [-1, 0, 1]},
                            },
                        },
                    },
                },
            },
        },
        "bands": {"type": "object", "additionalProperties": _BANDS},
        "service_bands": {"type": "object", "additionalProperties": _BANDS},
        "actions": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "weight"],
                "additionalProperties": False,
                "properties": {
                    "name": {"enum": ["restart", "recreate"]},
                    "weight": {"type": "number", "exclusiveMinimum": 0},
                    "duration_s": {"type": "number", "exclusiveMinimum": 0},
                    "enabled": {"type": "boolean"},
                    "handles": {"type": "array", "items": {"enum": list(FAILURE_KINDS)}},
                },
            },
        },
        "faults": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["target", "kind"],
                "additionalProperties": False,
                "properties": {
                    "target": {"type": "string"},
                    "kind": {"enum": list(FAULT_KINDS)},
                    "anchor": {"enum": ["start", "fulfillment", "healthcheck"]},
                    "index": {"type": "integer", "minimum": 1},
                    "offset_s": {"type": "number"},
                    "metric": {"enum": ["u_cpu", "u_ram", "u_storage"]},
                    "value": {"type": "number", "minimum": 0, "maximum": 100},
                },
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "horizon_h": {"type": "number", "exclusiveMinimum": 0},
                "simulate_h": {"type": "number", "exclusiveMinimum": 0},
                "probe_period_s": {"type": "number", "exclusiveMinimum": 0},
                "planner": {"type": "string"},
                "transcript": {"type": "string"},
                "agent_policy": {"enum": ["strict", "relative_average", "count_match"]},
                "agent_k": {"type": "integer", "minimum": 1},
                "durations": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
            },
        },
    },
}

_DEFAULT_ACTIONS = [
    {"name": "restart", "weight": 1.0, "duration_s": 90.0, "handles": ["resource_status", "software"]},
    {"name": "recreate", "weight": 2.0, "duration_s": 200.0, "handles": list(FAILURE_KINDS)},
]


@dataclass
class Scenario:
    name: str
    intent: str
    zones: list[dict]
    bands: dict[str, QuantBands]
    service_bands: dict[str, QuantBands]
    actions: list[ActionCandidate]
    faults: list[dict]
    seed: int = 0
    horizon_h: float = 720.0
    simulate_h: float = 720.0
    probe_period_s: float = 60.0
    planner: str = "rules"
    transcript: str | None = None
    agent_policy: str = "strict"
    agent_k: int | None = None
    durations: dict[str, float] = field(default_factory=dict)
    source: str = ""


def _json_path(error: jsonschema.ValidationError) -> str:
    parts = list(error.absolute_path)
    if error.validator == "required":
        missing = error.message.split("'")[1] if "'" in error.message else ""
        parts.append(missing)
    elif error.validator == "additionalProperties" and "'" in error.message:
        parts.append(error.message.split("'")[1])
    return ".".join(str(p) for p in parts) or "<root>"


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("intent_assure.data").joinpath(f"{name}.json")))


def parse_scenario(data: Any, source: str = "") -> Scenario:
    """Validate a decoded scenario document and apply defaults."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = _json_path(err)
        raise ScenarioError(f"{source or 'scenario'}: {path}: {err.message}", path)

    run = data.get("run", {})
    planner = run.get("planner", "rules")
    if planner not in PLANNER_MODES:
        raise ScenarioError(f"unknown planner mode {planner!r}; expected one of {PLANNER_MODES}", "run.planner")

    zone_names = [z["name"] for z in data["zones"]]
    if len(set(zone_names)) != len(zone_names):
        raise ScenarioError("zone names must be unique", "zones")

    bands = default_resource_bands()
    for kpi, spec in data.get("bands", {}).items():
        if kpi not in bands:
            raise ScenarioError(f"no resource KPI named {kpi!r}", f"bands.{kpi}")
        bands[kpi] = QuantBands.from_dict(spec, kpi)
    service_bands = dict(SERVICE_BANDS)
    for kpi, spec in data.get("service_bands", {}).items():
        if kpi not in service_bands:
            raise ScenarioError(f"no service KPI named {kpi!r}", f"service_bands.{kpi}")
        service_bands[kpi] = QuantBands.from_dict({"low": 0.0, "high": 1.0, **spec}, kpi)

    actions = []
    for spec in data.get("actions", _DEFAULT_ACTIONS):
        default = next(a for a in _DEFAULT_ACTIONS if a["name"] == spec["name"])
        actions.append(
            ActionCandidate(
                spec["name"],
                float(spec["weight"]),
                float(spec.get("duration_s", default["duration_s"])),
                frozenset(spec.get("handles", default["handles"])),
                bool(spec.get("enabled", True)),
            )
        )
    durations = dict(run.get("durations", {}))
    for a in actions:
        durations.setdefault(a.name, a.duration)

    horizon = float(run.get("horizon_h", 720.0))
    transcript = run.get("transcript")
    if transcript is not None and source and not Path(transcript).is_absolute():
        transcript = str(Path(source).parent / transcript)
    if planner == "replay" and transcript is None:
        raise ScenarioError("replay planner needs run.transcript", "run.transcript")
    return Scenario(
        name=data.get("name", Path(source).stem if source else "scenario"),
        intent=data["intent"],
        zones=data["zones"],
        bands=bands,
        service_bands=service_bands,
        actions=actions,
        faults=list(data.get("faults", [])),
        seed=int(run.get("seed", 0)),
        horizon_h=horizon,
        simulate_h=float(run.get("simulate_h", horizon)),
        probe_period_s=float(run.get("probe_period_s", 60.0)),
        planner=planner,
        transcript=transcript,
        agent_policy=run.get("agent_policy", "strict"),
        agent_k=run.get("agent_k"),
        durations=durations,
        source=source,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        p = bundled_path(str(path))
    if not p.exists():
        raise ScenarioError(f"scenario {path} not found (bundled: {', '.join(BUNDLED)})", "")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: not valid JSON ({exc})", "") from exc
    scenario = parse_scenario(data, str(p))
    recorded = p.with_suffix(".transcript.jsonl")
    if scenario.transcript is None and recorded.exists():
        scenario.transcript = str(recorded)
    return scenario


def build_testbed(scenario: Scenario, seed: int | None = None) -> Testbed:
    zones = []
    for z in scenario.zones:
        zone = Zone(z["name"], float(z.get("base_availability", 0.999)))
        if "switches" in z:
            zone.switches = list(z["switches"])
        if "inventory" in z:
            zone.inventory = dict(z["inventory"])
        zone.agents = [AgentSpec(a["name"], a.get("resource", 1), a.get("software", 1)) for a in z.get("agents", [])]
        zones.append(zone)
    return Testbed(
        zones,
        seed=scenario.seed if seed is None else seed,
        durations=scenario.durations,
        probe_period=scenario.probe_period_s,
        bands=scenario.bands,
        agent_policy=scenario.agent_policy,
        agent_k=scenario.agent_k,
    )
