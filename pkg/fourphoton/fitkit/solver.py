"""
Least-squares fitting of scan data.

Nonlinear models run through Levenberg-Marquardt (``scipy.optimize``
``least_squares`` with ``method="lm"``) fed by a central-difference
Jacobian. The calibrated fringe model is linear in (C, C V4, C V2) and is
solved exactly instead.
"""

import logging
import warnings
from collections.abc import Callable, Mapping, Sequence
from dataclasses import is_dataclass

import numpy as np
from scipy.optimize import least_squares

from ..constants import (
    FIT_GRADIENT_TOL,
    FIT_MAX_ITERATIONS,
    FIT_RSS_RTOL,
    FIT_STEP_RTOL,
    JACOBIAN_STEP,
    POISSON_WEIGHT_FLOOR,
)
from ..errors import NumericalFailure
from ..scan import ScanTable
from ..types import FitModelKind, RealArray
from .models import FitModel, FringeModel, ModelParams, get_model
from .results import FitReport

logger = logging.getLogger(__name__)

type InitParams = ModelParams | Mapping[str, float] | Sequence[float]


def central_difference_jacobian(
    func: Callable[[RealArray], RealArray],
    params: RealArray,
    step: float = JACOBIAN_STEP,
) -> RealArray:
    """
    Jacobian of a vector function by central differences.

    Parameters
    ----------
    func : Callable[[RealArray], RealArray]
        Vector function of the parameters
    params : RealArray
        Evaluation point
    step : float, optional
        Relative step; parameter j moves by ``step * max(|p_j|, 1)``

    Returns
    -------
    RealArray
        Matrix of shape (len(func(params)), len(params))
    """
    params = np.asarray(params, dtype=np.float64)
    columns = []
    for j in range(params.size):
        h = step * max(abs(float(params[j])), 1.0)
        up = params.copy()
        down = params.copy()
        up[j] += h
        down[j] -= h
        columns.append((func(up) - func(down)) / (2.0 * h))
    return np.column_stack(columns)


def poisson_weights(y: RealArray) -> RealArray:
    """Weights 1 / max(y, 1) for counting data."""
    return 1.0 / np.maximum(y, POISSON_WEIGHT_FLOOR)


def _init_array(fit_model: FitModel, init: InitParams) -> RealArray:
    if isinstance(init, Mapping):
        return np.array([float(init[name]) for name in fit_model.param_names])
    if is_dataclass(init):
        return np.array([float(getattr(init, name)) for name in fit_model.param_names])
    values = np.asarray(init, dtype=np.float64).ravel()
    if values.size != fit_model.n_params:
        raise ValueError(
            f"Initial values for {fit_model.kind.value} need {fit_model.n_params} "
            f"entries, got {values.size}"
        )
    return values


def _check_data(fit_model: FitModel, x: RealArray, y: RealArray) -> None:
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(
            f"x and y must be 1-D of equal length, got {x.shape}, {y.shape}"
        )
    needed = fit_model.n_params + 1
    if len(x) < needed:
        raise ValueError(
            f"The {fit_model.kind.value} model needs at least {needed} rows, "
            f"got {len(x)}"
        )
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("Fit data must be finite")
    if np.any(y < 0):
        raise ValueError("Fit data must be non-negative")


def _levenberg_marquardt(
    fit_model: FitModel,
    x: RealArray,
    y: RealArray,
    start: RealArray,
    root_weights: RealArray,
) -> tuple[RealArray, int, bool, str]:
    def residuals(internal: RealArray) -> RealArray:
        external = fit_model.to_external(internal)
        return root_weights * (fit_model.evaluate(external, x) - y)

    def jacobian(internal: RealArray) -> RealArray:
        return central_difference_jacobian(residuals, internal)

    try:
        result = least_squares(
            residuals,
            fit_model.to_internal(start),
            jac=jacobian,
            method="lm",
            ftol=FIT_RSS_RTOL,
            xtol=FIT_STEP_RTOL,
            gtol=FIT_GRADIENT_TOL,
            max_nfev=FIT_MAX_ITERATIONS,
        )
    except ValueError as e:
        raise NumericalFailure(f"{fit_model.kind.value} fit failed: {e}") from e

    params = fit_model.normalize(fit_model.to_external(result.x))
    iterations = int(result.njev if result.njev is not None else result.nfev)
    return params, iterations, bool(result.status > 0), str(result.message)


def fit_arrays(
    x: RealArray,
    y: RealArray,
    model: FitModelKind | str,
    init: InitParams | None = None,
    weighted: bool = False,
    free_phase: bool = False,
) -> FitReport:
    """
    Fit a model to raw arrays.

    Parameters
    ----------
    x : RealArray
        Abscissae (micrometres for dip, radians for theta and fringe)
    y : RealArray
        Non-negative observations
    model : FitModelKind or str
        Model to fit
    init : parameters, optional
        Starting values; derived from the data when omitted. Ignored by the
        calibrated fringe model, which is solved exactly.
    weighted : bool, optional
        Use Poisson weights 1 / max(y, 1), by default False
    free_phase : bool, optional
        Fit a fringe phase origin, by default False

    Returns
    -------
    FitReport
        Parameters, standard errors and diagnostics

    Raises
    ------
    ValueError
        If there are too few rows or negative data
    FlatDataError
        If the data carry no shape
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    fit_model = get_model(model, free_phase=free_phase)
    _check_data(fit_model, x, y)

    weights = poisson_weights(y) if weighted else np.ones_like(y)
    root_weights = np.sqrt(weights)

    if isinstance(fit_model, FringeModel) and not fit_model.free_phase:
        guess = fit_model.initial_guess(x, y)
        params = fit_model.linear_solve(x, y, weights) if weighted else guess
        iterations, converged, message = 0, True, "exact linear least squares"
    else:
        start = (
            _init_array(fit_model, init)
            if init is not None
            else fit_model.initial_guess(x, y)
        )
        params, iterations, converged, message = _levenberg_marquardt(
            fit_model, x, y, start, root_weights
        )

    report = _build_report(
        fit_model, x, y, params, root_weights, iterations, converged, weighted, message
    )
    logger.debug("%s", report)
    if not converged:
        warnings.warn(
            f"{fit_model.kind.value} fit did not converge after {iterations} "
            f"iterations: {message}",
            stacklevel=2,
        )
    return report


def _build_report(
    fit_model: FitModel,
    x: RealArray,
    y: RealArray,
    params: RealArray,
    root_weights: RealArray,
    iterations: int,
    converged: bool,
    weighted: bool,
    message: str,
) -> FitReport:
    def residuals(p: RealArray) -> RealArray:
        return root_weights * (fit_model.evaluate(p, x) - y)

    r = residuals(params)
    rss = float(r @ r)
    weights = root_weights**2
    mean = float(np.sum(weights * y) / np.sum(weights))
    tss = float(np.sum(weights * (y - mean) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0

    dof = len(x) - fit_model.n_params
    jac = central_difference_jacobian(residuals, params)
    covariance = (rss / dof) * np.linalg.pinv(jac.T @ jac)
    errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))

    names = fit_model.param_names
    return FitReport(
        model=fit_model.kind,
        params={n: float(v) for n, v in zip(names, params, strict=True)},
        stderr={n: float(e) for n, e in zip(names, errors, strict=True)},
        rss=rss,
        r2=r2,
        iterations=iterations,
        converged=converged,
        n_points=len(x),
        weighted=weighted,
        message=message,
    )


def fit(
    data: ScanTable,
    model: FitModelKind | str,
    init: InitParams | None = None,
    weighted: bool = False,
    free_phase: bool = False,
) -> FitReport:
    """
    Fit a model to a scan table.

    Counts are fitted when the table has them, probabilities otherwise.

    Parameters
    ----------
    data : ScanTable
        Scan to fit
    model : FitModelKind or str
        dip, theta or fringe
    init : parameters, optional
        Starting values for the nonlinear models
    weighted : bool, optional
        Use Poisson weights, by default False
    free_phase : bool, optional
        Fit a fringe phase origin, by default False

    Returns
    -------
    FitReport
        Fit outcome; ``converged`` is False when the iteration budget ran out
    """
    return fit_arrays(
        data.x_array(),
        data.y_array(),
        model,
        init=init,
        weighted=weighted,
        free_phase=free_phase,
    )


def init_guess(
    data: ScanTable, model: FitModelKind | str, free_phase: bool = False
) -> ModelParams:
    """
    Data-derived starting parameters.

    Parameters
    ----------
    data : ScanTable
        Scan with at least four rows
    model : FitModelKind or str
        dip, theta or fringe

    Returns
    -------
    ModelParams
        Dip: B = max, V = 1 - min/max, x0 = argmin, w from half-depth
        crossings. Theta: C from the point nearest theta = 0, E/A from the
        min/max ratio. Fringe: the exact linear solution.

    Raises
    ------
    ValueError
        If fewer than four rows are given
    FlatDataError
        If the data are constant
    """
    if len(data) < 4:
        raise ValueError(f"Initial guesses need at least 4 rows, got {len(data)}")
    fit_model = get_model(model, free_phase=free_phase)
    values = fit_model.initial_guess(data.x_array(), data.y_array())
    return fit_model.make_params(values)
