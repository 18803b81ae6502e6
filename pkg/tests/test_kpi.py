import numpy as np
import pytest

from intent_assure import _kernels
from intent_assure.errors import ConfigurationError, DomainError
from intent_assure.kpi import (
    BINARY_STATUS_BANDS,
    DEFAULT_UTILIZATION_BANDS,
    NINE_LABELS,
    THREE_LABELS,
    KpiValue,
    KpiVector,
    QuantBands,
    Unit,
    kleene_assess,
    kleene_min,
    map9to3,
    quantize3,
    quantize9,
    quantize9_array,
)

# value, 9-ary, 9-ary description, 3-ary, 3-ary description
QUANTIZATION_TABLE = [
    (10, -4, "Very Low", -1, "Critical"),
    (15, -3, "Low", -1, "Critical"),
    (25, -2, "Slightly Low", 0, "Warning"),
    (35, -1, "Slightly < Normal", 0, "Warning"),
    (40, 0, "Normal", 1, "Normal"),
    (50, 0, "Normal", 1, "Normal"),
    (65, 0, "Normal", 1, "Normal"),
    (70, 0, "Normal", 1, "Normal"),
    (71, 1, "Slightly > Normal", 0, "Warning"),
    (75, 1, "Slightly > Normal", 0, "Warning"),
    (80, 2, "Slightly High", 0, "Warning"),
    (85, 3, "High", -1, "Critical"),
    (90, 4, "Very High", -1, "Critical"),
]


@pytest.mark.parametrize("value,nine,nine_desc,three,three_desc", QUANTIZATION_TABLE)
def test_reference_quantization_rows(value, nine, nine_desc, three, three_desc):
    assert quantize9(value, DEFAULT_UTILIZATION_BANDS) == nine
    assert map9to3(nine) == three
    assert quantize3(value, DEFAULT_UTILIZATION_BANDS) == three
    assert NINE_LABELS[nine] == nine_desc
    assert THREE_LABELS[three] == three_desc


def test_normal_band_is_closed_at_both_edges():
    assert quantize9(40.0, DEFAULT_UTILIZATION_BANDS) == 0
    assert quantize9(70.0, DEFAULT_UTILIZATION_BANDS) == 0
    assert quantize9(39.999, DEFAULT_UTILIZATION_BANDS) == -1
    assert quantize9(70.001, DEFAULT_UTILIZATION_BANDS) == 1


def test_binary_status_bands():
    assert quantize9(100, BINARY_STATUS_BANDS) == 0
    assert quantize9(0, BINARY_STATUS_BANDS) == -4
    assert quantize3(0, BINARY_STATUS_BANDS) == -1


def test_out_of_domain_value_names_the_kpi():
    with pytest.raises(DomainError, match="u_cpu"):
        quantize9(120, DEFAULT_UTILIZATION_BANDS, "u_cpu")
    with pytest.raises(DomainError):
        quantize9_array([50, 101], DEFAULT_UTILIZATION_BANDS)


@pytest.mark.parametrize("bad", [-5, 5, 1.5, True])
def test_map9to3_rejects_non_labels(bad):
    with pytest.raises(ValueError):
        map9to3(bad)


def test_bands_must_be_monotone():
    with pytest.raises(ConfigurationError):
        QuantBands((10, 30, 20, 40), (70, 75, 80, 85))
    with pytest.raises(ConfigurationError):
        QuantBands((10, 20, 30), (70, 75, 80, 85))


def test_bands_round_trip_through_dict():
    b = DEFAULT_UTILIZATION_BANDS
    assert QuantBands.from_dict(b.to_dict()) == b
    assert b.normal == (40.0, 70.0)
    assert [lab for lab, _, _ in b.intervals()] == list(range(-4, 5))


def test_kleene_assessment_is_worst_case():
    kpis = KpiVector.from_mapping({"u_cpu": 50, "u_ram": 75, "u_storage": 90})
    bands = {n: DEFAULT_UTILIZATION_BANDS for n in kpis.names}
    assert kleene_assess(kpis, bands) == -1
    assert kleene_assess(KpiVector.from_mapping({"u_cpu": 50}), bands) == 1
    assert kleene_min([1, 0, 1]) == 0


def test_kleene_assessment_needs_bands_for_every_kpi():
    with pytest.raises(ConfigurationError, match="u_gpu"):
        kleene_assess(KpiVector.from_mapping({"u_gpu": 50}), {})
    with pytest.raises(ConfigurationError):
        kleene_assess(KpiVector(()), {})


def test_kpi_vector_rejects_duplicates_and_bad_ranges():
    with pytest.raises(ConfigurationError):
        KpiVector((KpiValue("a", 1.0), KpiValue("a", 2.0)))
    with pytest.raises(DomainError):
        KpiValue("k_As", 1.2, Unit.FRACTION)
    with pytest.raises(ConfigurationError):
        KpiVector((), kind="wished")
    v = KpiVector.from_mapping({"a": 1.0, "b": 2.0})
    assert v["b"].value == 2.0 and "a" in v and v.as_dict() == {"a": 1.0, "b": 2.0}
    with pytest.raises(KeyError):
        v["c"]


def test_array_quantization_matches_scalar():
    values = np.array([row[0] for row in QUANTIZATION_TABLE], dtype=float)
    assert quantize9_array(values, DEFAULT_UTILIZATION_BANDS).tolist() == [row[1] for row in QUANTIZATION_TABLE]


def test_backend_flag_is_reported():
    assert _kernels.BACKEND in ("numba", "numpy")
