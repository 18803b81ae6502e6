"""Intent fulfillment and assurance with KPI drift detection.

An intent in natural language is turned into an ordered policy tree,
executed on a simulated cloud testbed, then watched: each healthcheck
quantizes the operational KPIs, measures drift against the targets, and
triggers corrective policies when the service strays.
"""

from ._kernels import BACKEND
from .availability import (
    AvailabilityTracker,
    combined_availability,
    format_percent,
    intent_health,
    max_downtime,
    required_redundancy,
    service_availability,
)
from .drift import (
    DriftReport,
    Target,
    TargetSpec,
    delta_vector,
    drift_report,
    error,
    euclidean_distance,
    gradient,
    level_drift,
    scaled_gradient,
)
from .errors import (
    AssuranceError,
    ConfigurationError,
    DomainError,
    EscalationError,
    FormalizationError,
    GenerationError,
    IllegalTransition,
    PairingError,
    ParseError,
    PlanningAborted,
    ScenarioError,
    SequencingError,
    SingularityError,
    TreeError,
    UnknownIntentType,
)
from .health import (
    ResourceMetrics,
    SubServiceHealth,
    agent_health,
    assess_service,
    normalize_health,
    resource_health,
    service_health_pct,
    subservice_health,
)
from .kpi import (
    BINARY_STATUS_BANDS,
    DEFAULT_UTILIZATION_BANDS,
    KpiValue,
    KpiVector,
    QuantBands,
    Unit,
    kleene_assess,
    map9to3,
    quantize3,
    quantize9,
)
from .loop import AssuranceLoop, LoopState, ScenarioResult, run_scenario
from .policy import (
    ExecutionFeedback,
    Policy,
    PolicyTree,
    Ref,
    parse_policy,
    serialize_policy,
)
from .report import emit_report
from .scenario import Scenario, load_scenario
from .testbed import FaultEvent, Testbed, Zone

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BINARY_STATUS_BANDS",
    "DEFAULT_UTILIZATION_BANDS",
    "AssuranceError",
    "AssuranceLoop",
    "AvailabilityTracker",
    "ConfigurationError",
    "DomainError",
    "DriftReport",
    "EscalationError",
    "ExecutionFeedback",
    "FaultEvent",
    "FormalizationError",
    "GenerationError",
    "IllegalTransition",
    "KpiValue",
    "KpiVector",
    "LoopState",
    "PairingError",
    "ParseError",
    "PlanningAborted",
    "Policy",
    "PolicyTree",
    "QuantBands",
    "Ref",
    "ResourceMetrics",
    "Scenario",
    "ScenarioError",
    "ScenarioResult",
    "SequencingError",
    "SingularityError",
    "SubServiceHealth",
    "Target",
    "TargetSpec",
    "Testbed",
    "TreeError",
    "Unit",
    "UnknownIntentType",
    "Zone",
    "agent_health",
    "assess_service",
    "combined_availability",
    "delta_vector",
    "drift_report",
    "emit_report",
    "error",
    "euclidean_distance",
    "format_percent",
    "gradient",
    "intent_health",
    "kleene_assess",
    "level_drift",
    "load_scenario",
    "map9to3",
    "max_downtime",
    "normalize_health",
    "parse_policy",
    "quantize3",
    "quantize9",
    "required_redundancy",
    "resource_health",
    "run_scenario",
    "scaled_gradient",
    "serialize_policy",
    "service_availability",
    "service_health_pct",
    "subservice_health",
]
