import math

import pytest

from intent_assure.drift import (
    Target,
    TargetSpec,
    delta_series,
    delta_vector,
    drift_report,
    error,
    error_series,
    euclidean_distance,
    gradient,
    level_drift,
    levels_gradient,
    scaled_gradient,
)
from intent_assure.errors import (
    ConfigurationError,
    DomainError,
    PairingError,
    SingularityError,
)
from intent_assure.health import default_resource_bands, default_resource_targets
from intent_assure.kpi import DEFAULT_UTILIZATION_BANDS, KpiVector, QuantBands

UTIL = {"u_cpu": DEFAULT_UTILIZATION_BANDS, "u_ram": DEFAULT_UTILIZATION_BANDS, "u_storage": DEFAULT_UTILIZATION_BANDS}
BAND_TARGETS = TargetSpec({"u_cpu": (40, 70), "u_ram": (40, 70), "u_storage": (40, 70)})


def test_delta_distance_error_on_point_targets():
    op = KpiVector.from_mapping({"a": 3.0, "b": 4.0})
    target = TargetSpec({"a": 0.0, "b": 0.0})
    d = delta_vector(op, target)
    assert d.as_dict() == {"a": 3.0, "b": 4.0}
    assert euclidean_distance(d) == 5.0
    assert error(d) == 25.0
    assert gradient(op, target).as_dict() == {"a": 6.0, "b": 8.0}


def test_band_target_measures_to_nearest_violated_edge():
    op = KpiVector.from_mapping({"u_cpu": 90, "u_ram": 55, "u_storage": 30})
    assert delta_vector(op, BAND_TARGETS).as_dict() == {"u_cpu": 20.0, "u_ram": 0.0, "u_storage": -10.0}


def test_scaled_gradient_worked_example():
    op = KpiVector.from_mapping({"u_cpu": 90, "u_ram": 55, "u_storage": 80})
    g = scaled_gradient(op, BAND_TARGETS, UTIL).as_dict(scaled=True)
    assert g["u_cpu"] == pytest.approx(0.5714285714, abs=1e-9)
    assert round(g["u_cpu"], 2) == 0.57
    assert g["u_storage"] == pytest.approx(0.2857142857, abs=1e-9)
    assert abs(g["u_storage"] - 0.28) <= 0.01
    assert g["u_ram"] == 0.0


def test_scaled_gradient_zero_edge_is_singular():
    bands = {"x": QuantBands((0, 0, 0, 0), (0, 0, 0, 0), -10, 10)}
    op = KpiVector.from_mapping({"x": 5.0})
    g = scaled_gradient(op, TargetSpec({"x": 0.0}), bands)
    assert g.scaled == (math.inf,) and g.singular == ("x",)
    with pytest.raises(SingularityError):
        scaled_gradient(op, TargetSpec({"x": 0.0}), bands, strict=True)


def test_scaled_gradient_needs_bands():
    with pytest.raises(ConfigurationError):
        scaled_gradient(KpiVector.from_mapping({"q": 1}), TargetSpec({"q": 0}), {})


def test_pairing_errors_list_both_sides():
    with pytest.raises(PairingError) as err:
        delta_vector(KpiVector.from_mapping({"a": 1}), TargetSpec({"b": 1}))
    assert err.value.missing_target == ("a",)
    assert err.value.missing_operational == ("b",)


def test_inverted_target_band():
    with pytest.raises(DomainError):
        Target(5, 1)


def test_dead_resource_level_drift():
    dead = KpiVector.from_mapping({"u_cpu": 0, "u_ram": 0, "u_storage": 0, "s_net": 0, "s_r": 0})
    delta, grad = level_drift(dead, default_resource_bands())
    assert delta.values == (-2.0,) * 5
    assert grad.raw == (-4.0,) * 5
    assert grad.domain == "level"
    assert levels_gradient({"collector_2": -1}).raw == (-4.0,)
    assert levels_gradient({"collector_1": 1}).raw == (0.0,)


def test_drift_report_zero_and_display():
    healthy = KpiVector.from_mapping({"u_cpu": 50, "u_ram": 57, "u_storage": 50, "s_net": 100, "s_r": 100})
    report = drift_report(healthy, default_resource_targets(), default_resource_bands())
    assert report.is_zero_drift and report.distance == 0.0
    hot = KpiVector.from_mapping({"u_cpu": 90, "u_ram": 55, "u_storage": 80, "s_net": 100, "s_r": 100})
    out = drift_report(hot, default_resource_targets(), default_resource_bands()).to_dict()
    assert not out["is_zero_drift"]
    assert out["display"]["scaled_gradient"]["u_cpu"] == 0.57
    assert out["display"]["scaled_gradient"]["u_storage"] == 0.29
    assert out["error"] == 500.0
    assert out["distance"] == math.sqrt(500.0)


def test_series_kernels_match_scalar_path():
    rows = [[90.0, 55.0, 80.0], [50.0, 30.0, 70.0]]
    names = ["u_cpu", "u_ram", "u_storage"]
    assert delta_series(rows, names, BAND_TARGETS).tolist() == [[20.0, 0.0, 10.0], [0.0, -10.0, 0.0]]
    assert error_series(rows, names, BAND_TARGETS).tolist() == [500.0, 100.0]
