"""
Scenario runners producing probability curves.

A scan sweeps one variable of the HWP1 - phase shifter - HWP2
interferometer (or the source delay) and records the post-selected
probability of one detection pattern per row. ``poissonize`` turns a curve
into synthetic counts.
"""

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import pandas as pd

from .constants import THETA_BALANCED, THETA_STAR
from .errors import ConfigError
from .optics import detect_prob, interferometer, run_circuit
from .parallel import ParallelConfig, ParallelScanEngine
from .source import (
    DelayModel,
    SchmidtSpec,
    SourceState,
    apply_delay,
    fock_input,
    ideal_two_pairs,
    schmidt_from_e_over_a,
    schmidt_two_pairs,
)
from .types import Pattern, RealArray, ScanVariable, SourceKind

logger = logging.getLogger(__name__)

_DEFAULT_ANGLES: dict[ScanVariable, tuple[float, float, float]] = {
    ScanVariable.DELAY: (0.0, 0.0, THETA_STAR),
    ScanVariable.THETA1: (THETA_STAR, 0.0, THETA_BALANCED),
    ScanVariable.THETA2: (0.0, 0.0, THETA_STAR),
    ScanVariable.PHI: (THETA_STAR, 0.0, THETA_BALANCED),
}


@dataclass(frozen=True, slots=True)
class ScanConfig:
    """
    Source, circuit and sweep of one scan.

    Angles are in radians and delays in micrometres.

    Attributes
    ----------
    variable : ScanVariable
        Swept quantity
    start, stop : float
        Sweep range, ``start < stop``
    steps : int
        Number of rows, >= 2
    source : SourceKind
        Kind of input state
    lambdas : tuple[float, ...] | None
        Schmidt weights for ``SourceKind.SCHMIDT``
    e_over_a : float | None
        Mismatch parameter for ``SourceKind.E_OVER_A``
    fock_counts : tuple[int, ...] | None
        Photon counts for ``SourceKind.FOCK``
    theta1, phi, theta2 : float
        Fixed circuit settings; the swept one is ignored
    delay : DelayModel
        Fixed delay and coherence length; ``delta`` is ignored by delay scans
    pattern : tuple[int, ...] | None
        Detection pattern; defaults to the input's own counts, (2, 2) for a
        double pair
    """

    variable: ScanVariable
    start: float
    stop: float
    steps: int
    source: SourceKind = SourceKind.IDEAL
    lambdas: tuple[float, ...] | None = None
    e_over_a: float | None = None
    fock_counts: tuple[int, ...] | None = None
    theta1: float = 0.0
    phi: float = 0.0
    theta2: float = THETA_STAR
    delay: DelayModel = field(default_factory=DelayModel)
    pattern: Pattern | None = None

    def __post_init__(self) -> None:
        """Validate sweep and source settings."""
        if self.steps < 2:
            raise ConfigError(f"A scan needs at least 2 steps, got {self.steps}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError(
                f"Sweep bounds must be finite, got {self.start}, {self.stop}"
            )
        if not self.start < self.stop:
            raise ConfigError(
                f"Sweep start must be below stop, got {self.start} >= {self.stop}"
            )
        required = {
            SourceKind.SCHMIDT: ("lambdas", self.lambdas),
            SourceKind.E_OVER_A: ("e_over_a", self.e_over_a),
            SourceKind.FOCK: ("fock_counts", self.fock_counts),
        }
        if self.source in required:
            name, value = required[self.source]
            if value is None:
                raise ConfigError(f"Source '{self.source.value}' needs '{name}'")

    @classmethod
    def for_variable(
        cls,
        variable: ScanVariable,
        start: float,
        stop: float,
        steps: int,
        **settings: Any,
    ) -> "ScanConfig":
        """
        Build a config with the usual circuit for each sweep.

        Delay and theta2 sweeps use HWP1 at 0 and HWP2 at the magic angle;
        phi and theta1 sweeps use HWP1 at the magic angle and HWP2 at 22.5
        degrees. Keyword settings override the defaults.
        """
        theta1, phi, theta2 = _DEFAULT_ANGLES[variable]
        defaults: dict[str, Any] = {"theta1": theta1, "phi": phi, "theta2": theta2}
        defaults.update(settings)
        return cls(variable, start, stop, steps, **defaults)

    def xs(self) -> RealArray:
        """Sweep positions, evenly spaced and including both ends."""
        return np.linspace(self.start, self.stop, self.steps)

    def build_source(self) -> SourceState:
        """Undelayed input state."""
        match self.source:
            case SourceKind.IDEAL:
                return ideal_two_pairs()
            case SourceKind.SCHMIDT:
                return schmidt_two_pairs(SchmidtSpec(tuple(self.lambdas or ())))
            case SourceKind.E_OVER_A:
                spec = schmidt_from_e_over_a(float(self.e_over_a or 0))
                return schmidt_two_pairs(spec)
            case SourceKind.FOCK:
                return fock_input(tuple(self.fock_counts or ()))

    def to_metadata(self) -> dict[str, Any]:
        """Plain dictionary echo of the config."""
        return {
            "variable": self.variable.value,
            "start": self.start,
            "stop": self.stop,
            "steps": self.steps,
            "source": self.source.value,
            "lambdas": list(self.lambdas) if self.lambdas is not None else None,
            "e_over_a": self.e_over_a,
            "fock_counts": (
                list(self.fock_counts) if self.fock_counts is not None else None
            ),
            "theta1": self.theta1,
            "phi": self.phi,
            "theta2": self.theta2,
            "delta": self.delay.delta,
            "coherence_length": self.delay.coherence_length,
        }


@dataclass(frozen=True, slots=True)
class ScanTable:
    """
    Sampled curve of one scenario.

    Attributes
    ----------
    variable : ScanVariable
        Swept quantity; ``x`` is in radians for angles, micrometres for delay
    x : tuple[float, ...]
        Strictly increasing sweep positions
    probability : tuple[float, ...]
        Detection probabilities in [0, 1]
    counts : tuple[int, ...] | None
        Optional sampled counts
    metadata : Mapping[str, Any]
        Echo of the generating config, ignored by equality
    """

    variable: ScanVariable
    x: tuple[float, ...]
    probability: tuple[float, ...]
    counts: tuple[int, ...] | None = None
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        """Validate row consistency."""
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        probability = tuple(float(v) for v in self.probability)
        object.__setattr__(self, "probability", probability)
        if len(self.x) != len(self.probability):
            raise ValueError(
                f"x and probability lengths differ: "
                f"{len(self.x)} != {len(self.probability)}"
            )
        if any(b <= a for a, b in zip(self.x, self.x[1:])):
            raise ValueError("Scan x values must be strictly increasing")
        if any(not 0.0 <= p <= 1.0 for p in self.probability):
            raise ValueError("Scan probabilities must lie in [0, 1]")
        if self.counts is not None:
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
            if len(self.counts) != len(self.x):
                raise ValueError(
                    f"counts length {len(self.counts)} "
                    f"does not match {len(self.x)} rows"
                )
            if any(c < 0 for c in self.counts):
                raise ValueError("Counts must be non-negative")

    @property
    def scenario(self) -> str:
        """Scenario name of the swept variable."""
        return self.variable.scenario

    @property
    def has_counts(self) -> bool:
        """Whether a counts column is present."""
        return self.counts is not None

    def x_array(self) -> RealArray:
        """Sweep positions as an array."""
        return np.asarray(self.x, dtype=np.float64)

    def y_array(self) -> RealArray:
        """Counts when present, probabilities otherwise."""
        values = self.counts if self.counts is not None else self.probability
        return np.asarray(values, dtype=np.float64)

    def with_counts(self, counts: tuple[int, ...] | None) -> "ScanTable":
        """Copy of the table with a new counts column."""
        return replace(self, counts=counts)

    def to_dataframe(self) -> pd.DataFrame:
        """
        Convert to a pandas DataFrame.

        Returns
        -------
        pd.DataFrame
            Columns ``x``, ``probability`` and ``counts`` when present
        """
        data: dict[str, Any] = {
            "x": list(self.x),
            "probability": list(self.probability),
        }
        if self.counts is not None:
            data["counts"] = pd.array(self.counts, dtype="int64")
        df = pd.DataFrame(data)
        df.attrs["scenario"] = self.scenario
        return df

    def __len__(self) -> int:
        return len(self.x)


def _row_probability(
    cfg: ScanConfig, src: SourceState, pattern: Pattern, x: float
) -> float:
    theta1, phi, theta2 = cfg.theta1, cfg.phi, cfg.theta2
    match cfg.variable:
        case ScanVariable.DELAY:
            src = apply_delay(src, replace(cfg.delay, delta=float(x)))
        case ScanVariable.THETA1:
            theta1 = float(x)
        case ScanVariable.THETA2:
            theta2 = float(x)
        case ScanVariable.PHI:
            phi = float(x)
    output = run_circuit(src.ket, interferometer(theta1, phi, theta2))
    return detect_prob(output, pattern)


def _default_pattern(src: SourceState) -> Pattern:
    first = next(iter(src.ket))[0]
    return first.pattern(max(2, src.ket.max_external + 1))


def run_scan(cfg: ScanConfig, parallel: ParallelConfig | None = None) -> ScanTable:
    """
    Evaluate a scan.

    Parameters
    ----------
    cfg : ScanConfig
        Scan description
    parallel : ParallelConfig | None, optional
        Row evaluation settings; output is identical for any setting

    Returns
    -------
    ScanTable
        One row per sweep position, in increasing x
    """
    src = cfg.build_source()
    if cfg.variable is not ScanVariable.DELAY:
        src = apply_delay(src, cfg.delay)
    pattern = cfg.pattern if cfg.pattern is not None else _default_pattern(src)
    xs = [float(x) for x in cfg.xs()]

    logger.debug(
        "Running %s scan: %d rows, source %s, pattern %s",
        cfg.variable.scenario,
        len(xs),
        cfg.source.value,
        pattern,
    )
    engine = ParallelScanEngine(parallel)
    probabilities = engine.map_rows(
        lambda x: _row_probability(cfg, src, pattern, x), xs
    )
    return ScanTable(
        cfg.variable, tuple(xs), tuple(probabilities), metadata=cfg.to_metadata()
    )


def _require(cfg: ScanConfig, variable: ScanVariable) -> None:
    if cfg.variable is not variable:
        raise ConfigError(
            f"{variable.scenario} needs a '{variable.value}' sweep, "
            f"got '{cfg.variable.value}'"
        )


def hom_dip_scan(cfg: ScanConfig, parallel: ParallelConfig | None = None) -> ScanTable:
    """Four-photon coincidence against the relative H/V delay."""
    _require(cfg, ScanVariable.DELAY)
    return run_scan(cfg, parallel)


def theta_scan(cfg: ScanConfig, parallel: ParallelConfig | None = None) -> ScanTable:
    """Four-photon coincidence against the HWP2 angle at fixed delay."""
    _require(cfg, ScanVariable.THETA2)
    return run_scan(cfg, parallel)


def fringe_scan(cfg: ScanConfig, parallel: ParallelConfig | None = None) -> ScanTable:
    """Four-photon coincidence against the interferometer phase."""
    _require(cfg, ScanVariable.PHI)
    return run_scan(cfg, parallel)


def poissonize(table: ScanTable, mean_counts_at_max: float, seed: int) -> ScanTable:
    """
    Sample Poisson counts along a probability curve.

    Parameters
    ----------
    table : ScanTable
        Curve to sample
    mean_counts_at_max : float
        Mean count at the curve's maximum, >= 0
    seed : int
        Non-negative seed of the PCG64 generator

    Returns
    -------
    ScanTable
        Copy of the table with a counts column; identical seeds give
        identical counts

    Raises
    ------
    ValueError
        If the mean is negative or not finite, or the seed is negative
    """
    if not (math.isfinite(mean_counts_at_max) and mean_counts_at_max >= 0):
        raise ValueError(
            f"mean_counts_at_max must be finite and >= 0, got {mean_counts_at_max}"
        )
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")

    probability = np.asarray(table.probability, dtype=np.float64)
    peak = float(probability.max(initial=0.0))
    if peak == 0.0 or mean_counts_at_max == 0.0:
        return table.with_counts(tuple(0 for _ in table.x))

    rng = np.random.Generator(np.random.PCG64(seed))
    means = probability / peak * mean_counts_at_max
    counts = rng.poisson(means)
    return table.with_counts(tuple(int(c) for c in counts))


def fringe_visibility(table: ScanTable) -> float:
    """
    Contrast (max - min) / (max + min) of a curve.

    Uses counts when present; returns 0 for an all-zero curve.
    """
    y = table.y_array()
    high, low = float(y.max()), float(y.min())
    if high + low == 0.0:
        return 0.0
    return (high - low) / (high + low)
