"""
Optical elements, circuits and detection.

Beam splitters, half-wave plates and phase shifters are composed into
circuits acting on fock-core states. Detection is internal-mode blind: a
detection pattern counts photons per external channel and sums over every
internal assignment.
"""

import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import override

import numpy as np

from .constants import DEFAULT_CHANNELS, DETECTION_NORM_TOLERANCE
from .errors import InvalidStateError
from .fock import Ket, ModeId, ModeTransform, annihilate, apply_mode_transform
from .types import Pattern

logger = logging.getLogger(__name__)


def hwp_transmissivity(theta: float) -> float:
    """
    Transmissivity of a half-wave plate followed by a polarizing splitter.

    Parameters
    ----------
    theta : float
        Plate rotation angle in radians

    Returns
    -------
    float
        T = cos^2(2 theta)
    """
    return math.cos(2.0 * theta) ** 2


class Element(ABC):
    """
    Abstract base class for optical elements.

    Every element acts as a unitary on a subset of the external channels and
    as the identity on internal modes.
    """

    @property
    @abstractmethod
    def ports(self) -> tuple[int, ...]:
        """External channels the element acts on."""
        pass

    @abstractmethod
    def block(self) -> np.ndarray:
        """Unitary block acting on ``ports``, in port order."""
        pass

    def transform(self, channels: int = DEFAULT_CHANNELS) -> ModeTransform:
        """
        Embed the element's block into a ``channels`` x ``channels`` unitary.

        Parameters
        ----------
        channels : int, optional
            Number of external channels, by default 2

        Returns
        -------
        ModeTransform
            The embedded transform
        """
        if max(self.ports) >= channels:
            raise ValueError(
                f"{type(self).__name__} uses port {max(self.ports)} "
                f"but the circuit has {channels} channels"
            )
        matrix = np.eye(channels, dtype=np.complex128)
        matrix[np.ix_(self.ports, self.ports)] = self.block()
        return ModeTransform(matrix, label=repr(self))


def _check_ports(ports: tuple[int, int]) -> None:
    if len(ports) != 2 or ports[0] == ports[1] or min(ports) < 0:
        raise ValueError(f"Ports must be two distinct channels, got {ports}")


@dataclass(frozen=True, slots=True)
class BeamSplitter(Element):
    """
    Lossless beam splitter.

    With ports (p, q) the output operators are
    ``A = sqrt(T) a + sqrt(R) b`` and ``B = sqrt(T) b - sqrt(R) a``.

    Attributes
    ----------
    transmissivity : float
        T in [0, 1]; the reflectivity is R = 1 - T
    channels : tuple[int, int]
        Input ports (a, b)
    """

    transmissivity: float
    channels: tuple[int, int] = (0, 1)

    def __post_init__(self) -> None:
        """Validate transmissivity and ports."""
        if not 0.0 <= self.transmissivity <= 1.0:
            raise ValueError(
                f"Transmissivity must be between 0 and 1, got {self.transmissivity}"
            )
        _check_ports(self.channels)

    @property
    @override
    def ports(self) -> tuple[int, ...]:
        return self.channels

    @property
    def reflectivity(self) -> float:
        """R = 1 - T."""
        return 1.0 - self.transmissivity

    @override
    def block(self) -> np.ndarray:
        t = math.sqrt(self.transmissivity)
        r = math.sqrt(self.reflectivity)
        return np.array([[t, r], [-r, t]], dtype=np.complex128)


@dataclass(frozen=True, slots=True)
class HalfWavePlate(Element):
    """
    Half-wave plate with polarizing splitter, an equivalent beam splitter.

    Attributes
    ----------
    theta : float
        Rotation angle in radians
    channels : tuple[int, int]
        Polarization channels (H, V)
    """

    theta: float
    channels: tuple[int, int] = (0, 1)

    def __post_init__(self) -> None:
        """Validate ports."""
        _check_ports(self.channels)

    @property
    @override
    def ports(self) -> tuple[int, ...]:
        return self.channels

    def equivalent(self) -> BeamSplitter:
        """Beam splitter with T = cos^2(2 theta) on the same ports."""
        return BeamSplitter(hwp_transmissivity(self.theta), self.channels)

    @override
    def block(self) -> np.ndarray:
        return self.equivalent().block()


@dataclass(frozen=True, slots=True)
class PhaseShifter(Element):
    """
    Phase shifter imprinting exp(i phi) on one channel.

    Attributes
    ----------
    phi : float
        Phase in radians
    port : int
        Channel receiving the phase (B by default)
    """

    phi: float
    port: int = 1

    def __post_init__(self) -> None:
        """Validate port."""
        if self.port < 0:
            raise ValueError(f"Port must be non-negative, got {self.port}")

    @property
    @override
    def ports(self) -> tuple[int, ...]:
        return (self.port,)

    @override
    def block(self) -> np.ndarray:
        return np.array([[np.exp(1j * self.phi)]], dtype=np.complex128)


def element_transform(
    element: Element, channels: int = DEFAULT_CHANNELS
) -> ModeTransform:
    """
    Unitary of a single element embedded at its ports.

    Parameters
    ----------
    element : Element
        Optical element
    channels : int, optional
        Number of external channels, by default 2

    Returns
    -------
    ModeTransform
        The element's transform
    """
    return element.transform(channels)


@dataclass(frozen=True, slots=True)
class Circuit:
    """
    Ordered sequence of optical elements.

    Attributes
    ----------
    elements : tuple[Element, ...]
        Elements in the order light meets them
    channels : int
        Number of external channels M
    """

    elements: tuple[Element, ...] = ()
    channels: int = DEFAULT_CHANNELS

    def __post_init__(self) -> None:
        """Validate that elements fit into the channel count."""
        if self.channels < 2:
            raise ValueError(
                f"A circuit needs at least 2 channels, got {self.channels}"
            )
        object.__setattr__(self, "elements", tuple(self.elements))
        for element in self.elements:
            if max(element.ports) >= self.channels:
                raise ValueError(
                    f"{element!r} uses port {max(element.ports)} but the circuit "
                    f"has {self.channels} channels"
                )

    def transform(self) -> ModeTransform:
        """Single transform equivalent to the whole circuit."""
        total = ModeTransform.identity(self.channels)
        for element in self.elements:
            total = total.then(element.transform(self.channels))
        return total


def interferometer(theta1: float, phi: float, theta2: float) -> Circuit:
    """
    Polarization interferometer HWP1 - phase shifter - HWP2.

    Parameters
    ----------
    theta1 : float
        First plate angle in radians (0 leaves the input unsplit)
    phi : float
        Phase on the V channel in radians
    theta2 : float
        Second plate angle in radians

    Returns
    -------
    Circuit
        Two-channel circuit
    """
    return Circuit(
        (HalfWavePlate(theta1), PhaseShifter(phi, port=1), HalfWavePlate(theta2))
    )


def run_circuit(state: Ket, circuit: Circuit) -> Ket:
    """
    Propagate a state through a circuit, element by element.

    Parameters
    ----------
    state : Ket
        Input state
    circuit : Circuit
        Circuit to apply

    Returns
    -------
    Ket
        Output state

    Raises
    ------
    ValueError
        If the state occupies channels the circuit does not have
    """
    if state.max_external >= circuit.channels:
        raise ValueError(
            f"State occupies channel {state.max_external} but the circuit has "
            f"{circuit.channels} channels"
        )
    for element in circuit.elements:
        state = apply_mode_transform(state, element.transform(circuit.channels))
    return state


@dataclass(frozen=True, slots=True)
class DetectionPattern:
    """
    Internal-blind photon counts per external channel.

    Attributes
    ----------
    counts : tuple[int, ...]
        Photons registered on channels 0, 1, ...
    """

    counts: Pattern

    def __post_init__(self) -> None:
        """Validate counts."""
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if any(c < 0 for c in self.counts):
            raise ValueError(
                f"Detection counts must be non-negative, got {self.counts}"
            )

    @property
    def total_n(self) -> int:
        """Total number of detected photons."""
        return sum(self.counts)


def _pattern_width(state: Ket, width: int) -> int:
    return max(width, state.max_external + 1)


def _pad(counts: Pattern, width: int) -> Pattern:
    return tuple(counts) + (0,) * (width - len(counts))


def _check_normalized(state: Ket, renormalize: bool) -> Ket:
    if state.is_normalized(DETECTION_NORM_TOLERANCE):
        return state
    if renormalize:
        return state.normalized()
    raise InvalidStateError(
        f"Detection needs a normalized state, squared norm is {state.squared_norm!r}"
    )


def detect_prob(
    state: Ket, pattern: DetectionPattern | Pattern, renormalize: bool = False
) -> float:
    """
    Probability of an internal-blind detection pattern.

    Parameters
    ----------
    state : Ket
        Normalized state
    pattern : DetectionPattern or tuple[int, ...]
        Photon count per external channel
    renormalize : bool, optional
        Normalize the state instead of rejecting it, by default False

    Returns
    -------
    float
        Sum of |amplitude|^2 over basis states whose per-channel totals
        match the pattern, clipped to [0, 1]

    Raises
    ------
    InvalidStateError
        If the state is not normalized and ``renormalize`` is False
    """
    counts = pattern.counts if isinstance(pattern, DetectionPattern) else pattern
    state = _check_normalized(state, renormalize)
    width = _pattern_width(state, len(counts))
    target = _pad(counts, width)
    probability = math.fsum(
        abs(amplitude) ** 2
        for fock, amplitude in state
        if fock.pattern(width) == target
    )
    return min(max(probability, 0.0), 1.0)


def output_distribution(
    state: Ket, channels: int = DEFAULT_CHANNELS, renormalize: bool = False
) -> dict[Pattern, float]:
    """
    Probability of every detection pattern the state can produce.

    Parameters
    ----------
    state : Ket
        Normalized state
    channels : int, optional
        Minimum pattern width, by default 2
    renormalize : bool, optional
        Normalize the state instead of rejecting it, by default False

    Returns
    -------
    dict[tuple[int, ...], float]
        Pattern to probability, sorted by pattern
    """
    state = _check_normalized(state, renormalize)
    width = _pattern_width(state, channels)
    buckets: dict[Pattern, list[float]] = {}
    for fock, amplitude in state:
        buckets.setdefault(fock.pattern(width), []).append(abs(amplitude) ** 2)
    return {p: math.fsum(buckets[p]) for p in sorted(buckets)}


def normally_ordered_moment(
    state: Ket, channel_pair: tuple[int, int] = (0, 1)
) -> float:
    """
    Expectation of C^dag^2 D^dag^2 D^2 C^2 for an internal-blind detector pair.

    Annihilation operators are applied explicitly and summed over every
    internal-mode assignment, which gives the normally ordered moment
    <:n_C (n_C - 1) n_D (n_D - 1):>.

    Parameters
    ----------
    state : Ket
        Four-photon state
    channel_pair : tuple[int, int], optional
        External channels (C, D), by default (0, 1)

    Returns
    -------
    float
        The moment; equals 4 * P(2 at C, 2 at D) for four-photon states

    Raises
    ------
    ValueError
        If the state does not hold exactly four photons
    """
    if state.photon_number != 4:
        raise ValueError(
            f"Moment needs a four-photon state, got photon number {state.photon_number}"
        )
    c, d = channel_pair
    if c == d:
        raise ValueError(f"Channel pair must be distinct, got {channel_pair}")
    internals = sorted({m.internal for fock, _ in state for m in fock.modes})

    total = 0.0
    for k1, k2 in itertools.product(internals, repeat=2):
        lowered_c = annihilate(annihilate(state, ModeId(c, k1)), ModeId(c, k2))
        if not len(lowered_c):
            continue
        for k3, k4 in itertools.product(internals, repeat=2):
            lowered = annihilate(annihilate(lowered_c, ModeId(d, k3)), ModeId(d, k4))
            total += lowered.squared_norm
    return total
