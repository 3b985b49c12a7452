"""
HWP1 balance search.

With partially distinguishable pairs the fringe picks up a cos 2phi term.
Moving HWP1 slightly away from the magic angle trades the two paths against
each other; this module finds the angle where the fitted V2 vanishes.
"""

import logging
import math
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from ..constants import (
    BALANCE_FRINGE_POINTS,
    BALANCE_GRID_STEP_DEG,
    BALANCE_HALF_WIDTH_DEG,
    BALANCE_XTOL,
    DEFAULT_BALANCE_TOLERANCE,
    DEG_TO_RAD,
    RAD_TO_DEG,
    THETA_BALANCED,
    THETA_STAR,
)
from ..parallel import ParallelConfig, ParallelScanEngine
from ..scan import ScanConfig, fringe_scan
from ..source import SchmidtSpec
from ..types import ScanVariable, SourceKind
from .results import BalanceResult, FitReport
from .solver import fit

logger = logging.getLogger(__name__)


def fringe_report(spec: SchmidtSpec, theta1: float) -> FitReport:
    """
    Fringe fit of the noiseless fringe at a given HWP1 angle.

    Parameters
    ----------
    spec : SchmidtSpec
        Source Schmidt weights
    theta1 : float
        HWP1 angle in radians

    Returns
    -------
    FitReport
        Exact linear fringe fit over one period of phi
    """
    period = 2.0 * math.pi
    cfg = ScanConfig(
        ScanVariable.PHI,
        0.0,
        period * (BALANCE_FRINGE_POINTS - 1) / BALANCE_FRINGE_POINTS,
        BALANCE_FRINGE_POINTS,
        source=SourceKind.SCHMIDT,
        lambdas=spec.lambdas,
        theta1=theta1,
        theta2=THETA_BALANCED,
    )
    return fit(fringe_scan(cfg, ParallelConfig(n_workers=1)), "fringe")


def _abs_v2(spec: SchmidtSpec, theta1: float) -> float:
    return abs(fringe_report(spec, theta1).params["v2"])


def balance_theta1(
    spec: SchmidtSpec | None = None,
    tolerance: float = DEFAULT_BALANCE_TOLERANCE,
    parallel: ParallelConfig | None = None,
) -> BalanceResult:
    """
    Find the HWP1 angle that nulls the fringe's cos 2phi term.

    A 0.05 degree grid over the magic angle +/- 3 degrees locates the
    smallest |V2|; golden-section search then refines it between the grid
    neighbours.

    Parameters
    ----------
    spec : SchmidtSpec | None, optional
        Source Schmidt weights, ideal pairs when omitted
    tolerance : float, optional
        |V2| bound for a balanced result, by default 0.02
    parallel : ParallelConfig | None, optional
        Settings for the grid evaluation

    Returns
    -------
    BalanceResult
        Best angle, the fringe fit there and the balanced flag

    Raises
    ------
    ValueError
        If the tolerance is negative
    """
    if tolerance < 0:
        raise ValueError(f"Tolerance must be non-negative, got {tolerance}")
    spec = spec or SchmidtSpec((1.0,))

    steps = int(round(2.0 * BALANCE_HALF_WIDTH_DEG / BALANCE_GRID_STEP_DEG))
    offsets = np.arange(steps + 1) - steps / 2
    grid = THETA_STAR + DEG_TO_RAD * BALANCE_GRID_STEP_DEG * offsets
    values = ParallelScanEngine(parallel).map_rows(
        lambda t: _abs_v2(spec, float(t)), [float(t) for t in grid]
    )
    best = int(np.argmin(values))
    theta1 = float(grid[best])
    best_value = values[best]

    if 0 < best < len(grid) - 1 and best_value > 0.0:
        try:
            result = minimize_scalar(
                lambda t: _abs_v2(spec, float(t)),
                bracket=(float(grid[best - 1]), theta1, float(grid[best + 1])),
                method="golden",
                options={"xtol": BALANCE_XTOL},
            )
            if float(result.fun) <= best_value:
                theta1 = float(result.x)
        except (ValueError, RuntimeError) as e:
            logger.debug("Golden refinement skipped: %s", e)

    report = fringe_report(spec, theta1)
    v2 = abs(report.params["v2"])
    balanced = v2 <= tolerance
    logger.debug(
        "Balance search: theta1=%.6f deg, |V2|=%.3e, V4=%.6f",
        theta1 * RAD_TO_DEG,
        v2,
        report.params["v4"],
    )
    if not balanced:
        warnings.warn(
            f"HWP1 balance not reached: best |V2|={v2:.3g} "
            f"exceeds tolerance {tolerance}",
            stacklevel=2,
        )
    return BalanceResult(theta1, report, balanced, tolerance, grid_points=len(grid))
