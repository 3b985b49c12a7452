"""
Double-pair input states.

Two photon pairs from one down-conversion source are modelled by a pair
creation operator ``P = sum_k lambda_k h_k^dag v_k^dag`` over Schmidt modes
k. The four-photon input is ``P^2 |vac>`` normalized; a single Schmidt mode
gives the ideal ``|2_H, 2_V>``. A relative H/V delay rotates each H internal
mode partly onto a fresh orthogonal mode.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import lru_cache

from .constants import (
    CHANNEL_H,
    CHANNEL_V,
    DEFAULT_COHERENCE_LENGTH_UM,
    MAX_SCHMIDT_MODES,
    NORM_TOLERANCE,
    SCHMIDT_NORM_TOLERANCE,
)
from .errors import InvalidStateError
from .fock import FockState, Ket, ModeId, apply_internal_isometry, create

logger = logging.getLogger(__name__)

# exp(-x^2/2) underflows to zero beyond this many coherence lengths
_OVERLAP_CUTOFF = 40.0


@dataclass(frozen=True, slots=True)
class SchmidtSpec:
    """
    Schmidt weights of the pair emission amplitude.

    Attributes
    ----------
    lambdas : tuple[float, ...]
        Non-negative weights with sum of squares 1, at most four of them
    """

    lambdas: tuple[float, ...]

    def __post_init__(self) -> None:
        """Validate the weights."""
        lambdas = tuple(float(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lambdas)
        if not 1 <= len(lambdas) <= MAX_SCHMIDT_MODES:
            raise ValueError(
                f"Schmidt spec needs 1 to {MAX_SCHMIDT_MODES} weights, "
                f"got {len(lambdas)}"
            )
        if any(not math.isfinite(x) or x < 0 for x in lambdas):
            raise ValueError(f"Schmidt weights must be finite and >= 0, got {lambdas}")
        if not any(x > 0 for x in lambdas):
            raise ValueError("Schmidt spec needs at least one positive weight")
        total = math.fsum(x * x for x in lambdas)
        if abs(total - 1.0) > SCHMIDT_NORM_TOLERANCE:
            raise ValueError(
                f"Squared Schmidt weights must sum to 1, got {total!r}"
            )

    @property
    def modes(self) -> int:
        """Number of Schmidt modes K."""
        return len(self.lambdas)


@dataclass(frozen=True, slots=True)
class DelayModel:
    """
    Relative delay of the H photons against the V photons.

    Attributes
    ----------
    delta : float
        Delay in micrometres
    coherence_length : float
        Gaussian coherence length Lc in micrometres, > 0
    """

    delta: float = 0.0
    coherence_length: float = DEFAULT_COHERENCE_LENGTH_UM

    def __post_init__(self) -> None:
        """Validate the coherence length."""
        if not math.isfinite(self.delta):
            raise ValueError(f"Delay must be finite, got {self.delta}")
        if not self.coherence_length > 0:
            raise ValueError(
                f"Coherence length must be positive, got {self.coherence_length}"
            )

    @property
    def overlap(self) -> float:
        """Temporal overlap eta = exp(-delta^2 / (2 Lc^2)), 0 far outside Lc."""
        ratio = self.delta / self.coherence_length
        if abs(ratio) > _OVERLAP_CUTOFF:
            return 0.0
        return math.exp(-0.5 * ratio * ratio)


@dataclass(frozen=True, slots=True)
class SourceState:
    """
    Input state with the parameters that produced it.

    Attributes
    ----------
    ket : Ket
        Normalized state over channels H = 0 and V = 1
    schmidt : SchmidtSpec | None
        Schmidt weights of a double-pair source, None for plain Fock inputs
    delay : DelayModel | None
        Delay applied to the H photons, if any
    """

    ket: Ket
    schmidt: SchmidtSpec | None = None
    delay: DelayModel | None = field(default=None)

    def __post_init__(self) -> None:
        """Validate normalization and photon number."""
        if not self.ket.is_normalized(NORM_TOLERANCE):
            raise InvalidStateError(
                f"Source state must be normalized, squared norm is "
                f"{self.ket.squared_norm!r}"
            )
        if self.schmidt is not None and self.ket.photon_number != 4:
            raise InvalidStateError(
                f"Double-pair source must hold 4 photons, got {self.ket.photon_number}"
            )

    @property
    def photon_number(self) -> int:
        """Total photon number of the input."""
        return self.ket.photon_number or 0


def _apply_pair_operator(state: Ket, lambdas: Sequence[float]) -> Ket:
    terms: list[tuple[FockState, complex]] = []
    for k, weight in enumerate(lambdas):
        if weight == 0.0:
            continue
        pair = create(create(state, ModeId(CHANNEL_H, k)), ModeId(CHANNEL_V, k))
        terms.extend((fock, weight * amplitude) for fock, amplitude in pair)
    return Ket(terms)


@lru_cache(maxsize=64)
def schmidt_two_pairs(spec: SchmidtSpec) -> SourceState:
    """
    Double-pair state ``P^2 |vac>`` normalized, with P the pair operator.

    Parameters
    ----------
    spec : SchmidtSpec
        Schmidt weights

    Returns
    -------
    SourceState
        Normalized four-photon source

    Examples
    --------
    >>> src = schmidt_two_pairs(SchmidtSpec((1.0,)))
    >>> src.ket == ideal_two_pairs().ket
    True
    """
    state = Ket.vacuum()
    for _ in range(2):
        state = _apply_pair_operator(state, spec.lambdas)
    logger.debug("Built double-pair source with %d Schmidt modes", spec.modes)
    return SourceState(state.normalized(), schmidt=spec)


def ideal_two_pairs() -> SourceState:
    """Indistinguishable double pair ``|2_H, 2_V>`` in internal mode 0."""
    return schmidt_two_pairs(SchmidtSpec((1.0,)))


def e_over_a(spec: SchmidtSpec) -> float:
    """
    Temporal-mismatch parameter E/A = sum of lambda_k^4.

    Parameters
    ----------
    spec : SchmidtSpec
        Schmidt weights

    Returns
    -------
    float
        Value in (0, 1]; 1 only for a single non-zero weight
    """
    return math.fsum(x**4 for x in spec.lambdas)


def schmidt_from_e_over_a(value: float) -> SchmidtSpec:
    """
    Two-mode Schmidt spec realizing a given E/A.

    Parameters
    ----------
    value : float
        Target E/A in [1/2, 1]

    Returns
    -------
    SchmidtSpec
        Weights with lambda_1^2 = (1 + sqrt(2 value - 1)) / 2; a vanishing
        second weight is dropped

    Raises
    ------
    ValueError
        If ``value`` is outside [1/2, 1]
    """
    if not 0.5 <= value <= 1.0:
        raise ValueError(
            f"Two Schmidt modes realize E/A between 0.5 and 1, got {value}"
        )
    first = (1.0 + math.sqrt(2.0 * value - 1.0)) / 2.0
    second = 1.0 - first
    if second <= 0.0:
        return SchmidtSpec((1.0,))
    return SchmidtSpec((math.sqrt(first), math.sqrt(second)))


def apply_delay(src: SourceState, delay: DelayModel) -> SourceState:
    """
    Delay the H photons of a source.

    Internal dimensions double: V mode k becomes mode 2k, H mode k becomes
    ``eta * e_2k + sqrt(1 - eta^2) * e_(2k+1)``. Delayed parts of distinct
    Schmidt modes stay orthogonal.

    Parameters
    ----------
    src : SourceState
        Undelayed source
    delay : DelayModel
        Delay and coherence length

    Returns
    -------
    SourceState
        Delayed source; unchanged when the delay is zero
    """
    if delay.delta == 0.0:
        return src
    eta = delay.overlap
    leak = math.sqrt(max(0.0, 1.0 - eta * eta))
    internals = range(src.ket.max_internal + 1)

    h_images = {
        k: [(j, c) for j, c in ((2 * k, eta), (2 * k + 1, leak)) if c != 0.0]
        for k in internals
    }
    v_images = {k: [(2 * k, 1.0)] for k in internals}
    ket = apply_internal_isometry(src.ket, CHANNEL_H, h_images)
    ket = apply_internal_isometry(ket, CHANNEL_V, v_images)
    return SourceState(ket, schmidt=src.schmidt, delay=delay)


def fock_input(counts: Sequence[int]) -> SourceState:
    """
    Plain Fock input with every photon in internal mode 0.

    Parameters
    ----------
    counts : Sequence[int]
        Photon count per channel, e.g. (2, 1)

    Returns
    -------
    SourceState
        Single-term source without Schmidt metadata
    """
    return SourceState(Ket.basis(FockState.from_counts(counts)))
