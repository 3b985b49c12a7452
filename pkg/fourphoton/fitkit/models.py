"""
Fit models for dip, theta and fringe scans.

Each model exposes its parameter names, a vectorised evaluation, an
initial guess from data, and a mapping between the physical parameters and
the unconstrained ones the optimizer works with.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import astuple, dataclass
from typing import ClassVar, overload, override

import numpy as np
from scipy.special import expit, logit

from ..constants import FWHM_PER_WIDTH
from ..errors import FlatDataError
from ..types import FitModelKind, RealArray

logger = logging.getLogger(__name__)

# Clip range for the E/A starting value; logit(0) and logit(1) are infinite
_E_OVER_A_GUESS_RANGE = (0.02, 0.98)
_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True, slots=True)
class DipModelParams:
    """
    Gaussian dip ``B [1 - V exp(-(x - x0)^2 / (2 w^2))]``.

    Attributes
    ----------
    baseline : float
        B > 0
    visibility : float
        V in [0, 1]
    center : float
        Dip center x0 in micrometres
    width : float
        Gaussian width w > 0 in micrometres
    """

    baseline: float
    visibility: float
    center: float
    width: float

    def __post_init__(self) -> None:
        """Validate parameter ranges."""
        if not self.baseline > 0:
            raise ValueError(f"Baseline must be positive, got {self.baseline}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(
                f"Visibility must be between 0 and 1, got {self.visibility}"
            )
        if not self.width > 0:
            raise ValueError(f"Width must be positive, got {self.width}")

    @classmethod
    def from_fwhm(
        cls, baseline: float, visibility: float, center: float, fwhm: float
    ) -> "DipModelParams":
        """Build from the full width at half depth."""
        return cls(baseline, visibility, center, fwhm / FWHM_PER_WIDTH)

    @property
    def fwhm(self) -> float:
        """Full width at half depth, 2 w sqrt(2 ln 2)."""
        return self.width * FWHM_PER_WIDTH


@dataclass(frozen=True, slots=True)
class ThetaModelParams:
    """
    Half-wave-plate scan with temporal mismatch.

    Attributes
    ----------
    scale : float
        C > 0
    e_over_a : float
        Mismatch parameter in [0, 1]; 1 is perfect mode match
    """

    scale: float
    e_over_a: float

    def __post_init__(self) -> None:
        """Validate parameter ranges."""
        if not self.scale > 0:
            raise ValueError(f"Scale must be positive, got {self.scale}")
        if not 0.0 <= self.e_over_a <= 1.0:
            raise ValueError(f"E/A must be between 0 and 1, got {self.e_over_a}")


@dataclass(frozen=True, slots=True)
class FringeModelParams:
    """
    Four-photon fringe ``C [1 + V4 cos 4(x - x0) + V2 cos 2(x - x0)]``.

    Attributes
    ----------
    scale : float
        C > 0
    v4 : float
        cos 4phi amplitude, |V4| <= 1
    v2 : float
        cos 2phi amplitude, |V2| <= 1
    phase : float
        Phase origin x0 in radians, 0 for a calibrated interferometer
    """

    scale: float
    v4: float
    v2: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        """Validate parameter ranges."""
        if not self.scale > 0:
            raise ValueError(f"Scale must be positive, got {self.scale}")
        if abs(self.v4) > 1.0 or abs(self.v2) > 1.0:
            raise ValueError(
                f"Fringe amplitudes must satisfy |V| <= 1, "
                f"got V4={self.v4}, V2={self.v2}"
            )


type ModelParams = DipModelParams | ThetaModelParams | FringeModelParams


class FitModel(ABC):
    """
    Abstract base class for fit models.

    Parameters travel as float arrays ordered like ``param_names``.
    """

    kind: ClassVar[FitModelKind]
    param_names: tuple[str, ...]

    @property
    def n_params(self) -> int:
        """Number of fitted parameters."""
        return len(self.param_names)

    @abstractmethod
    def evaluate(self, params: RealArray, x: RealArray) -> RealArray:
        """Model values at ``x``."""
        pass

    @abstractmethod
    def initial_guess(self, x: RealArray, y: RealArray) -> RealArray:
        """Starting parameters derived from data."""
        pass

    @abstractmethod
    def make_params(self, values: Sequence[float]) -> ModelParams:
        """Typed, validated parameter object."""
        pass

    def to_internal(self, params: RealArray) -> RealArray:
        """Map physical parameters to the optimizer's space."""
        return np.asarray(params, dtype=np.float64).copy()

    def to_external(self, internal: RealArray) -> RealArray:
        """Map optimizer parameters back to physical ones."""
        return np.asarray(internal, dtype=np.float64).copy()

    def normalize(self, params: RealArray) -> RealArray:
        """Canonical representative of equivalent parameter sets."""
        return np.asarray(params, dtype=np.float64)


def _check_not_flat(y: RealArray) -> None:
    if y.size == 0 or float(np.ptp(y)) == 0.0:
        raise FlatDataError("Data are flat; no shape to derive an initial guess from")


def _half_depth_crossing(x: RealArray, y: RealArray, level: float, side: int) -> float:
    """Interpolated x where the curve first rises above ``level`` from the minimum."""
    i = int(np.argmin(y))
    step = -1 if side < 0 else 1
    j = i
    while 0 <= j + step < len(y) and y[j + step] <= level:
        j += step
    k = j + step
    if not 0 <= k < len(y):
        return float(x[j])
    if y[k] == y[j]:
        return float(x[j])
    fraction = (level - y[j]) / (y[k] - y[j])
    return float(x[j] + fraction * (x[k] - x[j]))


class DipModel(FitModel):
    """Gaussian dip in the relative delay."""

    kind = FitModelKind.DIP
    param_names = ("baseline", "visibility", "center", "width")

    @override
    def evaluate(self, params: RealArray, x: RealArray) -> RealArray:
        baseline, visibility, center, width = params
        dip = np.exp(-((x - center) ** 2) / (2.0 * width**2))
        return baseline * (1.0 - visibility * dip)

    @override
    def initial_guess(self, x: RealArray, y: RealArray) -> RealArray:
        _check_not_flat(y)
        high, low = float(np.max(y)), float(np.min(y))
        level = 0.5 * (high + low)
        left = _half_depth_crossing(x, y, level, -1)
        right = _half_depth_crossing(x, y, level, +1)
        fwhm = right - left
        if fwhm <= 0.0:
            fwhm = float(np.min(np.diff(x)))
        center = float(x[int(np.argmin(y))])
        return np.array([high, 1.0 - low / high, center, fwhm / FWHM_PER_WIDTH])

    @override
    def make_params(self, values: Sequence[float]) -> DipModelParams:
        return DipModelParams(*(float(v) for v in values))

    @override
    def normalize(self, params: RealArray) -> RealArray:
        out = np.asarray(params, dtype=np.float64).copy()
        out[3] = abs(out[3])
        return out


def _theta_shape(e_over_a: float | RealArray, x: RealArray) -> RealArray:
    s = np.sin(4.0 * x) ** 2
    return (1.0 - 1.5 * s) ** 2 + (3.0 * s - 1.0) * (1.0 - s) * (1.0 - e_over_a) / 2.0


class ThetaModel(FitModel):
    """
    Half-wave-plate scan with temporal mismatch.

    E/A is optimized through a logistic reparameterization so it stays in
    [0, 1].
    """

    kind = FitModelKind.THETA
    param_names = ("scale", "e_over_a")

    @override
    def evaluate(self, params: RealArray, x: RealArray) -> RealArray:
        scale, e_over_a = params
        return scale * _theta_shape(e_over_a, x)

    @override
    def initial_guess(self, x: RealArray, y: RealArray) -> RealArray:
        _check_not_flat(y)
        high, low = float(np.max(y)), float(np.min(y))
        e_over_a = float(np.clip(1.0 - 6.0 * low / high, *_E_OVER_A_GUESS_RANGE))
        y0 = float(y[int(np.argmin(np.abs(np.sin(4.0 * x))))])
        # at sin 4x = 0 the curve equals C (1 + E/A) / 2
        scale = max(y0, high) * 2.0 / (1.0 + e_over_a)
        return np.array([scale, e_over_a])

    @override
    def make_params(self, values: Sequence[float]) -> ThetaModelParams:
        return ThetaModelParams(*(float(v) for v in values))

    @override
    def to_internal(self, params: RealArray) -> RealArray:
        scale, e_over_a = params
        clipped = float(np.clip(e_over_a, 1e-12, 1.0 - 1e-12))
        return np.array([scale, logit(clipped)])

    @override
    def to_external(self, internal: RealArray) -> RealArray:
        scale, u = internal
        return np.array([scale, expit(u)])


class FringeModel(FitModel):
    """
    Four-photon fringe with cos 4phi and cos 2phi terms.

    With a calibrated phase origin the model is linear in
    (C, C V4, C V2) and is solved exactly; ``free_phase`` adds a phase
    origin fitted by Levenberg-Marquardt.
    """

    kind = FitModelKind.FRINGE

    def __init__(self, free_phase: bool = False):
        self.free_phase = free_phase
        names = ("scale", "v4", "v2")
        self.param_names = (*names, "phase") if free_phase else names

    @staticmethod
    def design_matrix(x: RealArray) -> RealArray:
        """Columns 1, cos 4x, cos 2x."""
        return np.column_stack([np.ones_like(x), np.cos(4.0 * x), np.cos(2.0 * x)])

    @override
    def evaluate(self, params: RealArray, x: RealArray) -> RealArray:
        scale, v4, v2 = params[:3]
        shifted = x - params[3] if self.free_phase else x
        return scale * (1.0 + v4 * np.cos(4.0 * shifted) + v2 * np.cos(2.0 * shifted))

    def linear_solve(
        self, x: RealArray, y: RealArray, weights: RealArray | None = None
    ) -> RealArray:
        """
        Exact least-squares (C, V4, V2) with the phase origin at 0.

        Parameters
        ----------
        x : RealArray
            Phases in radians
        y : RealArray
            Observations
        weights : RealArray | None, optional
            Per-point weights

        Returns
        -------
        RealArray
            C, V4, V2

        Raises
        ------
        FlatDataError
            If the fitted scale is zero
        """
        a = self.design_matrix(x)
        b = np.asarray(y, dtype=np.float64)
        if weights is not None:
            root = np.sqrt(weights)
            a = a * root[:, None]
            b = b * root
        coef, *_ = np.linalg.lstsq(a, b, rcond=None)
        scale = float(coef[0])
        if abs(scale) <= _EPS * b.size * float(np.max(np.abs(b), initial=0.0)):
            raise FlatDataError("Fringe data have zero mean; V4 and V2 are undefined")
        return np.array([scale, coef[1] / scale, coef[2] / scale])

    @override
    def initial_guess(self, x: RealArray, y: RealArray) -> RealArray:
        _check_not_flat(y)
        linear = self.linear_solve(x, y)
        return np.append(linear, 0.0) if self.free_phase else linear

    @override
    def make_params(self, values: Sequence[float]) -> FringeModelParams:
        return FringeModelParams(*(float(v) for v in values))

    @override
    def normalize(self, params: RealArray) -> RealArray:
        out = np.asarray(params, dtype=np.float64).copy()
        if self.free_phase:
            # cos 4x and cos 2x share the period pi
            out[3] = math.remainder(out[3], math.pi)
        return out


def get_model(kind: FitModelKind | str, free_phase: bool = False) -> FitModel:
    """
    Model instance for a kind.

    Parameters
    ----------
    kind : FitModelKind or str
        Model name (dip, theta, fringe)
    free_phase : bool, optional
        Fit a fringe phase origin, by default False

    Returns
    -------
    FitModel
        The model
    """
    kind = FitModelKind.from_string(kind) if isinstance(kind, str) else kind
    match kind:
        case FitModelKind.DIP:
            return DipModel()
        case FitModelKind.THETA:
            return ThetaModel()
        case FitModelKind.FRINGE:
            return FringeModel(free_phase)


def _params_array(
    model: FitModel, params: ModelParams | Mapping[str, float]
) -> RealArray:
    if isinstance(params, Mapping):
        missing = [name for name in model.param_names if name not in params]
        if missing:
            raise ValueError(f"Missing {model.kind.value} parameters: {missing}")
        return np.array([float(params[name]) for name in model.param_names])
    return np.array(astuple(params)[: model.n_params], dtype=np.float64)


@overload
def eval_model(
    model: FitModelKind | str, params: ModelParams | Mapping[str, float], x: float
) -> float: ...


@overload
def eval_model(
    model: FitModelKind | str, params: ModelParams | Mapping[str, float], x: RealArray
) -> RealArray: ...


def eval_model(
    model: FitModelKind | str,
    params: ModelParams | Mapping[str, float],
    x: float | RealArray,
) -> float | RealArray:
    """
    Evaluate a fit model.

    Parameters
    ----------
    model : FitModelKind or str
        Model name
    params : parameter dataclass or mapping
        Model parameters; a mapping is keyed by parameter name
    x : float or RealArray
        Delay in micrometres (dip) or angle in radians (theta, fringe)

    Returns
    -------
    float or RealArray
        Model value(s), same shape as ``x``

    Examples
    --------
    >>> round(eval_model("fringe", FringeModelParams(100.0, 0.62, 0.39), 0.0), 9)
    201.0
    """
    has_phase = isinstance(params, FringeModelParams) and params.phase != 0.0
    if isinstance(params, Mapping):
        has_phase = float(params.get("phase", 0.0)) != 0.0
    fit_model = get_model(model, free_phase=has_phase)
    grid = np.asarray(x, dtype=np.float64)
    values = fit_model.evaluate(_params_array(fit_model, params), grid)
    if np.ndim(x) == 0:
        return float(values)
    return values
