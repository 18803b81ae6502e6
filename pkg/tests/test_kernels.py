import os
import subprocess
import sys

import numpy as np
import pytest

from intent_assure import _kernels
from intent_assure.health import RESOURCE_KPIS, default_resource_bands
from intent_assure.kpi import edge_matrices

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not importable")


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(1)
    util = rng.uniform(0, 100, size=(2000, 3))
    util[:10] = [[12.5, 40.0, 70.0]] * 10
    status = np.where(rng.random((2000, 2)) < 0.05, 0.0, 100.0)
    values = np.ascontiguousarray(np.column_stack([util, status]))
    lower, upper = edge_matrices(default_resource_bands(), RESOURCE_KPIS)
    return values, lower, upper


@pytest.mark.parametrize("name", ["quantize9_matrix", "resource_levels"])
def test_numba_matches_numpy_on_bands(data, name):
    values, lower, upper = data
    a = getattr(_kernels, f"numpy_{name}")(values, lower, upper)
    b = getattr(_kernels, f"numba_{name}")(values, lower, upper)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("name", ["band_delta", "squared_error"])
def test_numba_matches_numpy_on_targets(data, name):
    values = data[0]
    lows = np.array([40.0, 40.0, 40.0, 100.0, 100.0])
    highs = np.array([70.0, 70.0, 70.0, 100.0, 100.0])
    a = getattr(_kernels, f"numpy_{name}")(values, lows, highs)
    b = getattr(_kernels, f"numba_{name}")(values, lows, highs)
    np.testing.assert_allclose(a, b, rtol=0, atol=0)


def test_environment_flag_selects_numpy():
    code = "from intent_assure import BACKEND; print(BACKEND)"
    env = {**os.environ, "INTENT_ASSURE_DISABLE_NUMBA": "1"}
    forced = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    env["INTENT_ASSURE_DISABLE_NUMBA"] = "0"
    default = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert forced.stdout.strip() == "numpy"
    assert default.stdout.strip() == "numba"


def test_golden_run_is_backend_independent():
    code = (
        "from intent_assure import run_scenario, load_scenario, emit_report;"
        "print(emit_report(run_scenario(load_scenario('paper-usecase')), 'json'))"
    )
    outs = []
    for flag in ("1", "0"):
        env = {**os.environ, "INTENT_ASSURE_DISABLE_NUMBA": flag}
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    assert outs[0] == outs[1]
