"""
Result containers for fits and balance searches.

Reports serialize to JSON-ready dictionaries with fixed key names and to
pandas DataFrames for tabular inspection.
"""

from dataclasses import dataclass, field
from typing import Any

import pandas as pd

from ..constants import FWHM_PER_WIDTH, RAD_TO_DEG
from ..types import FitModelKind
from .models import ModelParams, get_model


@dataclass(frozen=True, slots=True)
class FitReport:
    """
    Outcome of one least-squares fit.

    Attributes
    ----------
    model : FitModelKind
        Fitted model
    params : dict[str, float]
        Best-fit parameters by name
    stderr : dict[str, float]
        Standard errors from s^2 (J^T J)^-1
    rss : float
        Residual sum of squares (weighted when weighting is on)
    r2 : float
        Coefficient of determination, <= 1
    iterations : int
        Jacobian evaluations of the optimizer, 0 for exact linear solves
    converged : bool
        Whether the optimizer met its tolerances
    n_points : int
        Number of data rows
    weighted : bool
        Whether Poisson weights were used
    message : str
        Optimizer status text
    """

    model: FitModelKind
    params: dict[str, float]
    stderr: dict[str, float]
    rss: float
    r2: float
    iterations: int
    converged: bool
    n_points: int = 0
    weighted: bool = False
    message: str = field(default="", compare=False)

    def __getitem__(self, name: str) -> float:
        """Fitted value of parameter ``name``."""
        return self.params[name]

    def typed_params(self) -> ModelParams:
        """
        Parameters as the model's validated dataclass.

        Raises
        ------
        ValueError
            If the fitted values leave the model's physical range
        """
        fit_model = get_model(self.model, free_phase="phase" in self.params)
        return fit_model.make_params([self.params[n] for n in fit_model.param_names])

    def derived(self) -> dict[str, float]:
        """Quantities computed from the parameters (dip FWHM, phase in degrees)."""
        if self.model is FitModelKind.DIP:
            return {"fwhm": abs(self.params["width"]) * FWHM_PER_WIDTH}
        if "phase" in self.params:
            return {"phase_deg": self.params["phase"] * RAD_TO_DEG}
        return {}

    def to_dict(self) -> dict[str, Any]:
        """
        JSON-ready dictionary.

        Returns
        -------
        dict[str, Any]
            Keys ``model``, ``params``, ``stderr``, ``rss``, ``r2``,
            ``iterations``, ``converged`` and ``derived``
        """
        return {
            "model": self.model.value,
            "params": dict(self.params),
            "stderr": dict(self.stderr),
            "rss": self.rss,
            "r2": self.r2,
            "iterations": self.iterations,
            "converged": self.converged,
            "derived": self.derived(),
        }

    def to_dataframe(self) -> pd.DataFrame:
        """
        One row per parameter.

        Returns
        -------
        pd.DataFrame
            Columns ``parameter``, ``value`` and ``stderr``
        """
        return pd.DataFrame(
            {
                "parameter": list(self.params),
                "value": list(self.params.values()),
                "stderr": [self.stderr.get(name, float("nan")) for name in self.params],
            }
        )

    def __str__(self) -> str:
        body = ", ".join(
            f"{name}={value:.6g}+/-{self.stderr.get(name, float('nan')):.2g}"
            for name, value in self.params.items()
        )
        status = "converged" if self.converged else "NOT converged"
        return f"FitReport({self.model.value}: {body}; r2={self.r2:.9f}, {status})"


@dataclass(frozen=True, slots=True)
class BalanceResult:
    """
    Outcome of the HWP1 balance search.

    Attributes
    ----------
    theta1 : float
        HWP1 angle in radians minimizing |V2|
    report : FitReport
        Fringe fit at ``theta1``
    balanced : bool
        Whether |V2| met the tolerance
    tolerance : float
        Requested |V2| bound
    grid_points : int
        Number of coarse grid evaluations
    """

    theta1: float
    report: FitReport
    balanced: bool
    tolerance: float
    grid_points: int = 0

    @property
    def theta1_deg(self) -> float:
        """HWP1 angle in degrees."""
        return self.theta1 * RAD_TO_DEG

    @property
    def v2(self) -> float:
        """Fringe cos 2phi amplitude at the balanced angle."""
        return self.report.params["v2"]

    @property
    def v4(self) -> float:
        """Fringe cos 4phi amplitude at the balanced angle."""
        return self.report.params["v4"]

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready dictionary with the angle in both units."""
        return {
            "theta1_rad": self.theta1,
            "theta1_deg": self.theta1_deg,
            "v2": self.v2,
            "v4": self.v4,
            "balanced": self.balanced,
            "tolerance": self.tolerance,
            "fit": self.report.to_dict(),
        }
