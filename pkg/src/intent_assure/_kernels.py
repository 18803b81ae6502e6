"""Batch numeric kernels.

Every kernel exists twice: a numba ``@njit`` loop and a pure-numpy
expression. Which one the public names bind to is decided once at import:
numba is used when it imports cleanly and ``INTENT_ASSURE_DISABLE_NUMBA`` is
unset (or ``0``). Both variants stay importable for tests and benchmarks.

Shapes: ``values`` is ``(n, k)`` (n samples of k KPIs), edge arrays are
``(k, 4)``, band bounds are ``(k,)``.
"""

from __future__ import annotations

import os

import numpy as np

NINE_TO_THREE = np.array([-1, -1, 0, 0, 1, 0, 0, -1, -1], dtype=np.int8)


def numpy_quantize9_matrix(values, lower, upper):
    v = values[:, :, None]
    below = (v >= lower[None, :, :]).sum(axis=2)
    above = (v > upper[None, :, :]).sum(axis=2)
    return (below + above - 4).astype(np.int8)


def numpy_resource_levels(values, lower, upper):
    nine = numpy_quantize9_matrix(values, lower, upper)
    three = NINE_TO_THREE[nine + 4]
    return three.min(axis=1).astype(np.int8)


def numpy_band_delta(values, lows, highs):
    return np.where(values > highs, values - highs, np.where(values < lows, values - lows, 0.0))


def numpy_squared_error(values, lows, highs):
    d = numpy_band_delta(values, lows, highs)
    return (d * d).sum(axis=1)


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _flag_disabled() -> bool:
    return os.environ.get("INTENT_ASSURE_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def numba_quantize9_matrix(values, lower, upper):
        n, k = values.shape
        out = np.empty((n, k), dtype=np.int8)
        for i in range(n):
            for j in range(k):
                v = values[i, j]
                label = -4
                for e in range(4):
                    if v >= lower[j, e]:
                        label += 1
                for e in range(4):
                    if v > upper[j, e]:
                        label += 1
                out[i, j] = label
        return out

    @numba.njit(cache=True)
    def numba_resource_levels(values, lower, upper):
        n, k = values.shape
        out = np.empty(n, dtype=np.int8)
        for i in range(n):
            worst = 1
            for j in range(k):
                v = values[i, j]
                label = -4
                for e in range(4):
                    if v >= lower[j, e]:
                        label += 1
                for e in range(4):
                    if v > upper[j, e]:
                        label += 1
                if label <= -3 or label >= 3:
                    level = -1
                elif label == 0:
                    level = 1
                else:
                    level = 0
                worst = min(worst, level)
            out[i] = worst
        return out

    @numba.njit(cache=True)
    def numba_band_delta(values, lows, highs):
        n, k = values.shape
        out = np.zeros((n, k), dtype=np.float64)
        for i in range(n):
            for j in range(k):
                v = values[i, j]
                if v > highs[j]:
                    out[i, j] = v - highs[j]
                elif v < lows[j]:
                    out[i, j] = v - lows[j]
        return out

    @numba.njit(cache=True)
    def numba_squared_error(values, lows, highs):
        n, k = values.shape
        out = np.zeros(n, dtype=np.float64)
        for i in range(n):
            acc = 0.0
            for j in range(k):
                v = values[i, j]
                d = 0.0
                if v > highs[j]:
                    d = v - highs[j]
                elif v < lows[j]:
                    d = v - lows[j]
                acc += d * d
            out[i] = acc
        return out


USE_NUMBA = HAVE_NUMBA and not _flag_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"

if USE_NUMBA:
    quantize9_matrix = numba_quantize9_matrix
    resource_levels = numba_resource_levels
    band_delta = numba_band_delta
    squared_error = numba_squared_error
else:
    quantize9_matrix = numpy_quantize9_matrix
    resource_levels = numpy_resource_levels
    band_delta = numpy_band_delta
    squared_error = numpy_squared_error
