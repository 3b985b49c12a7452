"""
Fitting toolkit for four-photon scans.

Provides the dip, theta and fringe models, a Levenberg-Marquardt solver
with exact linear fringe fits, typed reports and the HWP1 balance search.
"""

from .balance import balance_theta1, fringe_report
from .models import (
    DipModel,
    DipModelParams,
    FitModel,
    FringeModel,
    FringeModelParams,
    ThetaModel,
    ThetaModelParams,
    eval_model,
    get_model,
)
from .results import BalanceResult, FitReport
from .solver import (
    central_difference_jacobian,
    fit,
    fit_arrays,
    init_guess,
    poisson_weights,
)

__all__ = [
    "DipModel",
    "DipModelParams",
    "ThetaModel",
    "ThetaModelParams",
    "FringeModel",
    "FringeModelParams",
    "FitModel",
    "get_model",
    "eval_model",
    "fit",
    "fit_arrays",
    "init_guess",
    "central_difference_jacobian",
    "poisson_weights",
    "FitReport",
    "BalanceResult",
    "balance_theta1",
    "fringe_report",
]
