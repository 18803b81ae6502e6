"""Compare the numba and numpy variants of the batch kernels.

Run: python benchmarks/bench_kernels.py [--rows N] [--repeat R]

The workload mirrors one collector probed every minute: rows are probe
samples of the five resource KPIs, so 43200 rows is a 30-day window.
"""

from __future__ import annotations

import argparse
import timeit
from functools import partial

import numpy as np

from intent_assure import _kernels
from intent_assure.health import RESOURCE_KPIS, default_resource_bands
from intent_assure.kpi import edge_matrices


def workload(rows: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    util = rng.uniform(0.0, 100.0, size=(rows, 3))
    status = np.where(rng.random((rows, 2)) < 0.01, 0.0, 100.0)
    return np.ascontiguousarray(np.column_stack([util, status]))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=43200)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return 1

    values = workload(args.rows)
    lower, upper = edge_matrices(default_resource_bands(), RESOURCE_KPIS)
    lows = np.array([40.0, 40.0, 40.0, 100.0, 100.0])
    highs = np.array([70.0, 70.0, 70.0, 100.0, 100.0])
    cases = {
        "quantize9_matrix": (lower, upper),
        "resource_levels": (lower, upper),
        "band_delta": (lows, highs),
        "squared_error": (lows, highs),
    }

    print(f"rows={args.rows} repeat={args.repeat} (best of 3, ms per call)")
    print(f"{'kernel':<18} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, extra in cases.items():
        np_fn = getattr(_kernels, f"numpy_{name}")
        nb_fn = getattr(_kernels, f"numba_{name}")
        assert np.array_equal(np_fn(values, *extra), nb_fn(values, *extra)), name
        t_np = min(timeit.repeat(partial(np_fn, values, *extra), number=args.repeat, repeat=3)) / args.repeat
        t_nb = min(timeit.repeat(partial(nb_fn, values, *extra), number=args.repeat, repeat=3)) / args.repeat
        print(f"{name:<18} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
