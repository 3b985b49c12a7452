"""
Benchmark script for scan evaluation and fitting throughput.

Measures rows per second for serial and threaded scans, the memory taken by
a multi-mode dip scan, and the cost of fits and the balance search.
"""

import math
import time
from typing import Any

import numpy as np
import psutil

from fourphoton import (
    FringeModelParams,
    ParallelConfig,
    ScanConfig,
    ScanVariable,
    SchmidtSpec,
    SourceKind,
    balance_theta1,
    eval_model,
    fit_arrays,
    run_scan,
)


def benchmark_scan(rows: int = 100, workers: int | None = 1) -> dict[str, Any]:
    """
    Measure scan speed and memory for a four-mode dip.

    Parameters
    ----------
    rows : int
        Number of scan rows
    workers : int | None
        Thread count, None for the engine default

    Returns
    -------
    dict[str, Any]
        Benchmark results
    """
    cfg = ScanConfig.for_variable(
        ScanVariable.DELAY,
        -500.0,
        500.0,
        rows,
        source=SourceKind.SCHMIDT,
        lambdas=(0.5, 0.5, 0.5, 0.5),
    )
    process = psutil.Process()
    mem_before = process.memory_info().rss / 1024 / 1024  # MB

    start = time.perf_counter()
    run_scan(cfg, ParallelConfig(n_workers=workers, chunk_size=8))
    elapsed = time.perf_counter() - start

    mem_after = process.memory_info().rss / 1024 / 1024  # MB
    return {
        "rows": rows,
        "workers": workers,
        "elapsed_time": elapsed,
        "rows_per_sec": rows / elapsed,
        "memory_used_mb": mem_after - mem_before,
    }


def benchmark_fits(n: int = 200) -> dict[str, Any]:
    """
    Measure linear and free-phase fringe fit rates.

    Parameters
    ----------
    n : int
        Number of fits of each kind

    Returns
    -------
    dict[str, Any]
        Benchmark results
    """
    phi = 2 * math.pi * np.arange(36) / 36
    y = eval_model("fringe", FringeModelParams(100.0, 0.62, 0.39, phase=0.05), phi)

    start = time.perf_counter()
    for _ in range(n):
        fit_arrays(phi, y, "fringe")
    linear_time = time.perf_counter() - start

    start = time.perf_counter()
    for _ in range(n):
        fit_arrays(phi, y, "fringe", free_phase=True)
    free_time = time.perf_counter() - start

    return {
        "fits": n,
        "linear_fits_per_sec": n / linear_time,
        "free_phase_fits_per_sec": n / free_time,
        "slowdown_factor": free_time / linear_time,
    }


def benchmark_balance() -> dict[str, Any]:
    """Time the HWP1 balance search for two equal Schmidt modes."""
    spec = SchmidtSpec((math.sqrt(0.5), math.sqrt(0.5)))
    start = time.perf_counter()
    result = balance_theta1(spec)
    return {
        "elapsed_time": time.perf_counter() - start,
        "grid_points": result.grid_points,
        "theta1_deg": result.theta1_deg,
        "v2": result.v2,
    }


def run_all_benchmarks() -> None:
    """Run all benchmarks and print results."""
    print("=" * 80)
    print("fourphoton Scan and Fit Benchmarks")
    print("=" * 80)
    print()

    print("1. Dip Scan, Four Schmidt Modes")
    print("-" * 80)
    for workers in (1, None):
        results = benchmark_scan(100, workers)
        label = "serial" if workers == 1 else "threaded"
        print(f"{label + ':':<25}{results['elapsed_time']:.3f} seconds")
        print(f"{'  rate:':<25}{results['rows_per_sec']:,.0f} rows/sec")
        print(f"{'  memory used:':<25}{results['memory_used_mb']:.2f} MB")
    print()

    print("2. Fringe Fits")
    print("-" * 80)
    results = benchmark_fits(200)
    print(f"Linear fits:             {results['linear_fits_per_sec']:,.0f} fits/sec")
    print(
        f"Free-phase fits:         {results['free_phase_fits_per_sec']:,.0f} fits/sec"
    )
    print(f"Slowdown factor:         {results['slowdown_factor']:.1f}x")
    print()

    print("3. Balance Search")
    print("-" * 80)
    results = benchmark_balance()
    print(f"Elapsed time:            {results['elapsed_time']:.3f} seconds")
    print(f"Grid points:             {results['grid_points']}")
    print(f"HWP1 angle:              {results['theta1_deg']:.4f} deg")
    print(f"Residual V2:             {results['v2']:.2e}")
    print()


if __name__ == "__main__":
    run_all_benchmarks()
