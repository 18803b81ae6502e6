import numpy as np
import pytest

from intent_assure.errors import ConfigurationError, DomainError
from intent_assure.health import (
    AgentHealthInputs,
    AgentStatus,
    ResourceMetrics,
    SubServiceHealth,
    agent_health,
    assess_service,
    composite_service_health,
    normalize_health,
    relative_average_q,
    resource_health,
    resource_health_batch,
    resource_health_pct,
    service_health_pct,
    subservice_health,
)


def test_collector_rows_from_the_use_case():
    assert resource_health(ResourceMetrics(60, 60, 50, 100, 100)) == 1
    assert resource_health(ResourceMetrics.dead()) == -1
    assert resource_health(ResourceMetrics(85, 60, 50)) == -1
    assert resource_health(ResourceMetrics(75, 60, 50)) == 0


def test_fault_scenario_service_health():
    healthy = SubServiceHealth("collector_1", 1, 1, 1)
    down = SubServiceHealth("collector_2", -1, 0, 0)
    snap = assess_service([healthy, down])
    assert [s.combined for s in snap.subservices] == [1, -1]
    assert snap.percent == 50.0
    assert (snap.k_hr, snap.k_hsw, snap.k_hnet, snap.combined) == (-1, 0, 0, -1)


def test_normalization_counts_warning_as_up():
    assert [normalize_health(x) for x in (-1, 0, 1)] == [0, 1, 1]
    assert service_health_pct([0, 1, 1, -1]) == 75.0
    with pytest.raises(ConfigurationError):
        service_health_pct([])


def test_status_metrics_are_binary():
    with pytest.raises(DomainError):
        ResourceMetrics(50, 50, 50, net_status=50)
    with pytest.raises(DomainError):
        ResourceMetrics(150, 50, 50)


def test_agent_policies():
    agents = AgentHealthInputs((AgentStatus(), AgentStatus(), AgentStatus(link=0)), k=1)
    assert agent_health(agents, "strict") == 0
    assert agent_health(agents, "relative_average") == 0
    assert agent_health(agents, "count_match") is True
    assert agent_health(AgentHealthInputs(agents.agents, k=2), "count_match") is False
    assert relative_average_q(0.95) == 1 and relative_average_q(0.5) == 0 and relative_average_q(0.2) == -1
    with pytest.raises(ConfigurationError):
        agent_health(agents, "vote")
    with pytest.raises(ConfigurationError):
        agent_health(AgentHealthInputs(()), "strict")


def test_level_validation():
    with pytest.raises(DomainError):
        subservice_health(2, 1, 1)
    with pytest.raises(DomainError):
        composite_service_health(1, 1, -2)


def test_resource_health_pct_convention():
    assert [resource_health_pct(x) for x in (1, 0, -1)] == [100.0, 50.0, 0.0]


def test_batch_matches_scalar():
    rows = np.array([[60, 60, 50, 100, 100], [0, 0, 0, 0, 0], [75, 60, 50, 100, 100]], dtype=float)
    assert resource_health_batch(rows).tolist() == [resource_health(ResourceMetrics(*r)) for r in rows]
