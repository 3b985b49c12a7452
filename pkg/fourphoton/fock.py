"""
Exact algebra of multimode bosonic Fock states.

States live in the occupation-number basis over modes labelled by an
external channel (beam-splitter port or polarization) and an internal index
(temporal or Schmidt mode). Linear optics acts on creation operators; this
module applies such maps by expanding the resulting creation-operator
polynomial multinomially, and offers a permanent-based transition amplitude
as an independent oracle.
"""

import logging
import math
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Self

import numpy as np

from .constants import (
    MAX_INTERNAL_MODES,
    MAX_PERMANENT_SIZE,
    MAX_PHOTONS,
    NORM_TOLERANCE,
    PRUNE_THRESHOLD,
    UNITARITY_TOLERANCE,
)
from .types import ComplexMatrix

logger = logging.getLogger(__name__)

type Monomial = tuple[tuple[ModeId, int], ...]
type ModeImages = Sequence[tuple[ModeId, complex]]


@dataclass(frozen=True, slots=True, order=True)
class ModeId:
    """
    Label of a single bosonic mode.

    Attributes
    ----------
    external : int
        Optical channel (0 <-> a/H, 1 <-> b/V, ...)
    internal : int
        Orthonormal internal (temporal/Schmidt) mode index, below
        ``MAX_INTERNAL_MODES``
    """

    external: int
    internal: int = 0

    def __post_init__(self) -> None:
        """Validate indices after initialization."""
        if self.external < 0 or self.internal < 0:
            raise ValueError(
                f"Mode indices must be non-negative, got "
                f"external={self.external}, internal={self.internal}"
            )
        if self.internal >= MAX_INTERNAL_MODES:
            raise ValueError(
                f"Internal mode index must be below {MAX_INTERNAL_MODES}, "
                f"got {self.internal}"
            )

    def __str__(self) -> str:
        return f"{self.external}.{self.internal}"


def _canonical(occupations: Iterable[tuple[ModeId, int]]) -> Monomial:
    """Merge repeated modes, drop empty ones, sort by (external, internal)."""
    merged: dict[ModeId, int] = {}
    for mode, count in occupations:
        if count < 0:
            raise ValueError(f"Photon count must be non-negative, got {count}")
        if count:
            merged[mode] = merged.get(mode, 0) + count
    return tuple(sorted(merged.items()))


@dataclass(frozen=True, slots=True, init=False)
class FockState:
    """
    Occupation-number basis state.

    Attributes
    ----------
    occupations : tuple[tuple[ModeId, int], ...]
        Non-zero photon counts, sorted by mode
    total_n : int
        Total photon number
    """

    occupations: Monomial
    total_n: int = field(compare=False)

    def __init__(self, occupations: Iterable[tuple[ModeId, int]] = ()):
        canonical = _canonical(occupations)
        object.__setattr__(self, "occupations", canonical)
        object.__setattr__(self, "total_n", sum(n for _, n in canonical))

    @classmethod
    def from_counts(cls, counts: Sequence[int], internal: int = 0) -> Self:
        """
        Build a state with one count per external channel.

        Parameters
        ----------
        counts : Sequence[int]
            Photon count for channels 0, 1, ...
        internal : int, optional
            Internal mode shared by every photon, by default 0

        Returns
        -------
        FockState
            The canonical state
        """
        return cls((ModeId(e, internal), n) for e, n in enumerate(counts))

    def count(self, mode: ModeId) -> int:
        """Photon number in ``mode`` (0 when absent)."""
        for m, n in self.occupations:
            if m == mode:
                return n
        return 0

    @property
    def modes(self) -> tuple[ModeId, ...]:
        """Occupied modes in canonical order."""
        return tuple(m for m, _ in self.occupations)

    @property
    def max_external(self) -> int:
        """Largest occupied channel index, -1 for the vacuum."""
        return max((m.external for m, _ in self.occupations), default=-1)

    @property
    def max_internal(self) -> int:
        """Largest occupied internal index, -1 for the vacuum."""
        return max((m.internal for m, _ in self.occupations), default=-1)

    def pattern(self, channels: int) -> tuple[int, ...]:
        """
        Photon counts per external channel, summed over internal modes.

        Parameters
        ----------
        channels : int
            Number of channels in the returned tuple

        Returns
        -------
        tuple[int, ...]
            Internal-blind detection pattern
        """
        counts = [0] * channels
        for mode, n in self.occupations:
            counts[mode.external] += n
        return tuple(counts)

    def factorial_product(self) -> int:
        """Product of n! over occupied modes."""
        return math.prod(math.factorial(n) for _, n in self.occupations)

    def __str__(self) -> str:
        if not self.occupations:
            return "|vac>"
        body = ",".join(f"{n}_{m}" for m, n in self.occupations)
        return f"|{body}>"


def make_fock(occupations: Iterable[tuple[ModeId, int]]) -> FockState:
    """
    Build a canonical Fock state.

    Repeated modes are merged by summing their counts; zero counts are
    dropped.

    Parameters
    ----------
    occupations : Iterable[tuple[ModeId, int]]
        (mode, count) pairs

    Returns
    -------
    FockState
        Canonical state

    Raises
    ------
    ValueError
        If a count is negative
    """
    return FockState(occupations)


class Ket:
    """
    Sparse complex superposition of Fock states with fixed photon number.

    Amplitudes whose magnitude falls below the prune threshold are removed
    on construction. Instances are immutable.
    """

    __slots__ = ("_terms", "_photon_number")

    def __init__(
        self,
        terms: Mapping[FockState, complex] | Iterable[tuple[FockState, complex]],
        prune: float = PRUNE_THRESHOLD,
    ):
        """
        Initialize a ket.

        Parameters
        ----------
        terms : Mapping or iterable of (FockState, amplitude)
            Basis states and amplitudes; repeated states are summed
        prune : float, optional
            Magnitude below which amplitudes are dropped

        Raises
        ------
        ValueError
            If the terms mix photon numbers
        """
        items = terms.items() if isinstance(terms, Mapping) else terms
        summed: dict[FockState, complex] = {}
        for state, amplitude in items:
            summed[state] = summed.get(state, 0j) + complex(amplitude)

        kept = {s: a for s, a in summed.items() if abs(a) >= prune}
        numbers = {s.total_n for s in kept}
        if len(numbers) > 1:
            raise ValueError(
                f"Ket terms must share one photon number, got {sorted(numbers)}"
            )
        self._terms = dict(sorted(kept.items(), key=lambda kv: kv[0].occupations))
        self._photon_number = numbers.pop() if numbers else None

    @classmethod
    def basis(cls, state: FockState) -> Self:
        """Normalized ket holding a single basis state."""
        return cls({state: 1.0})

    @classmethod
    def vacuum(cls) -> Self:
        """The vacuum ket."""
        return cls({FockState(): 1.0})

    @property
    def terms(self) -> Mapping[FockState, complex]:
        """Read-only view of the amplitudes."""
        return MappingProxyType(self._terms)

    @property
    def photon_number(self) -> int | None:
        """Photon number shared by all terms, ``None`` for the zero vector."""
        return self._photon_number

    @property
    def squared_norm(self) -> float:
        """Sum of squared amplitude magnitudes."""
        return math.fsum(abs(a) ** 2 for a in self._terms.values())

    def is_normalized(self, tolerance: float = NORM_TOLERANCE) -> bool:
        """Whether the squared norm is within ``tolerance`` of 1."""
        return abs(self.squared_norm - 1.0) <= tolerance

    def normalized(self) -> "Ket":
        """Return the ket scaled to unit norm."""
        norm = math.sqrt(self.squared_norm)
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero vector")
        return Ket({s: a / norm for s, a in self._terms.items()})

    def amplitude(self, state: FockState) -> complex:
        """Amplitude of ``state`` (0 when absent)."""
        return self._terms.get(state, 0j)

    @property
    def max_external(self) -> int:
        """Largest occupied channel index over all terms."""
        return max((s.max_external for s in self._terms), default=-1)

    @property
    def max_internal(self) -> int:
        """Largest occupied internal index over all terms."""
        return max((s.max_internal for s in self._terms), default=-1)

    def isclose(self, other: "Ket", atol: float = 1e-12) -> bool:
        """Amplitude-wise comparison within ``atol``."""
        keys = self._terms.keys() | other._terms.keys()
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= atol for k in keys)

    def __add__(self, other: "Ket") -> "Ket":
        return Ket(list(self._terms.items()) + list(other._terms.items()))

    def __mul__(self, scalar: complex) -> "Ket":
        return Ket({s: a * scalar for s, a in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ket):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[FockState, complex]]:
        return iter(self._terms.items())

    def __repr__(self) -> str:
        if not self._terms:
            return "Ket(0)"
        body = " + ".join(f"({a:.6g}){s}" for s, a in self._terms.items())
        return f"Ket({body})"


def inner(x: Ket, y: Ket) -> complex:
    """
    Inner product <x|y>, conjugate-linear in ``x``.

    Parameters
    ----------
    x : Ket
        Bra side
    y : Ket
        Ket side

    Returns
    -------
    complex
        The inner product
    """
    if len(x) > len(y):
        return sum((x.amplitude(s).conjugate() * a for s, a in y), start=0j)
    return sum((a.conjugate() * y.amplitude(s) for s, a in x), start=0j)


@dataclass(frozen=True, slots=True, eq=False)
class ModeTransform:
    """
    Unitary acting on external channels, identity on internal indices.

    The matrix maps input annihilation operators to output ones,
    ``out_k = sum_j matrix[k, j] in_j``; equivalently the input creation
    operator of channel ``j`` becomes ``sum_k matrix[k, j] out_k^dag``.

    Attributes
    ----------
    matrix : ComplexMatrix
        M x M unitary
    label : str
        Free text description
    """

    matrix: ComplexMatrix
    label: str = ""

    def __post_init__(self) -> None:
        """Validate shape and unitarity."""
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"Mode transform must be square, got {matrix.shape}")
        deviation = np.max(
            np.abs(matrix @ matrix.conj().T - np.eye(matrix.shape[0])), initial=0.0
        )
        if deviation > UNITARITY_TOLERANCE:
            raise ValueError(
                f"Mode transform '{self.label}' is not unitary "
                f"(max deviation {deviation:.3e})"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, channels: int) -> Self:
        """Identity transform on ``channels`` channels."""
        return cls(np.eye(channels, dtype=np.complex128), label="identity")

    @property
    def dimension(self) -> int:
        """Number of external channels."""
        return int(self.matrix.shape[0])

    def then(self, other: "ModeTransform") -> "ModeTransform":
        """Transform equivalent to applying ``self`` and then ``other``."""
        if other.dimension != self.dimension:
            raise ValueError(
                f"Cannot compose transforms of dimension {self.dimension} "
                f"and {other.dimension}"
            )
        return ModeTransform(
            other.matrix @ self.matrix, label=f"{self.label}>{other.label}"
        )


def random_unitary(channels: int, rng: np.random.Generator) -> ModeTransform:
    """
    Draw a Haar-random unitary.

    Parameters
    ----------
    channels : int
        Matrix dimension
    rng : np.random.Generator
        Random source

    Returns
    -------
    ModeTransform
        Random unitary transform
    """
    z = (
        rng.standard_normal((channels, channels))
        + 1j * rng.standard_normal((channels, channels))
    ) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return ModeTransform(q * phases, label="haar")


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write ``n`` as an ordered sum of ``parts`` non-negative ints."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first, *rest)


def _power(images: ModeImages, n: int) -> dict[Monomial, complex]:
    """Expand (sum_k c_k b_k^dag)^n into creation-operator monomials."""
    expansion: dict[Monomial, complex] = {}
    n_factorial = math.factorial(n)
    for powers in _compositions(n, len(images)):
        multinomial = n_factorial // math.prod(math.factorial(k) for k in powers)
        coefficient = complex(multinomial)
        for (_, c), k in zip(images, powers, strict=True):
            coefficient *= c**k
        if coefficient == 0:
            continue
        monomial = _canonical(
            (mode, k) for (mode, _), k in zip(images, powers, strict=True)
        )
        expansion[monomial] = expansion.get(monomial, 0j) + coefficient
    return expansion


def _multiply(
    left: dict[Monomial, complex], right: dict[Monomial, complex]
) -> dict[Monomial, complex]:
    """Product of two creation-operator polynomials."""
    product: dict[Monomial, complex] = {}
    for m1, c1 in left.items():
        for m2, c2 in right.items():
            monomial = _canonical(m1 + m2)
            product[monomial] = product.get(monomial, 0j) + c1 * c2
    return product


def substitute(state: Ket, images: Callable[[ModeId], ModeImages]) -> Ket:
    """
    Replace every creation operator by a linear combination and re-expand.

    Parameters
    ----------
    state : Ket
        Input state
    images : Callable[[ModeId], Sequence[tuple[ModeId, complex]]]
        Image of each input creation operator as (output mode, coefficient)
        pairs with distinct output modes

    Returns
    -------
    Ket
        The transformed state
    """
    powers: dict[tuple[ModeId, int], dict[Monomial, complex]] = {}
    output: dict[FockState, complex] = {}

    for fock, amplitude in state:
        polynomial: dict[Monomial, complex] = {(): 1.0 + 0j}
        for mode, n in fock.occupations:
            key = (mode, n)
            if key not in powers:
                powers[key] = _power(images(mode), n)
            polynomial = _multiply(polynomial, powers[key])

        scale = amplitude / math.sqrt(fock.factorial_product())
        for monomial, coefficient in polynomial.items():
            target = FockState(monomial)
            weight = math.sqrt(target.factorial_product())
            output[target] = output.get(target, 0j) + scale * coefficient * weight

    return Ket(output)


def apply_mode_transform(state: Ket, u: ModeTransform) -> Ket:
    """
    Apply a linear-optical transform to a state.

    Each input creation operator is substituted by its image under ``u`` and
    the creation-operator polynomial is expanded multinomially.

    Parameters
    ----------
    state : Ket
        Input state
    u : ModeTransform
        Unitary over the external channels

    Returns
    -------
    Ket
        Output state; norm and photon number are preserved

    Raises
    ------
    ValueError
        If the state occupies a channel outside the transform
    """
    if state.max_external >= u.dimension:
        raise ValueError(
            f"State occupies channel {state.max_external} but transform "
            f"'{u.label}' acts on {u.dimension} channels"
        )
    matrix = u.matrix
    columns: dict[int, list[tuple[int, complex]]] = {
        j: [(k, complex(matrix[k, j])) for k in range(u.dimension) if matrix[k, j] != 0]
        for j in range(u.dimension)
    }

    def images(mode: ModeId) -> ModeImages:
        return [(ModeId(k, mode.internal), c) for k, c in columns[mode.external]]

    return substitute(state, images)


def apply_internal_isometry(
    state: Ket,
    channel: int,
    images: Mapping[int, Sequence[tuple[int, complex]]],
) -> Ket:
    """
    Map internal modes of one channel onto combinations of internal modes.

    Parameters
    ----------
    state : Ket
        Input state
    channel : int
        External channel whose internal modes are remapped
    images : Mapping[int, Sequence[tuple[int, complex]]]
        For each internal index, its image as (internal index, coefficient)
        pairs; indices without an entry are left unchanged. Images must be
        orthonormal so the norm is preserved.

    Returns
    -------
    Ket
        The remapped state

    Raises
    ------
    ValueError
        If the images are not orthonormal
    """
    vectors = {k: dict(v) for k, v in images.items()}
    keys = sorted(vectors)
    for i, first in enumerate(keys):
        for second in keys[i:]:
            overlap = sum(
                (
                    complex(c).conjugate() * vectors[second].get(j, 0j)
                    for j, c in vectors[first].items()
                ),
                start=0j,
            )
            expected = 1.0 if first == second else 0.0
            if abs(overlap - expected) > UNITARITY_TOLERANCE:
                raise ValueError(
                    f"Internal images of modes {first} and {second} "
                    f"are not orthonormal"
                )

    def mapped(mode: ModeId) -> ModeImages:
        if mode.external != channel or mode.internal not in images:
            return [(mode, 1.0 + 0j)]
        return [(ModeId(channel, j), complex(c)) for j, c in images[mode.internal]]

    return substitute(state, mapped)


def annihilate(state: Ket, mode: ModeId) -> Ket:
    """Apply the annihilation operator of ``mode`` (result not normalized)."""
    output: dict[FockState, complex] = {}
    for fock, amplitude in state:
        n = fock.count(mode)
        if n == 0:
            continue
        lowered = FockState(
            (m, c - 1 if m == mode else c) for m, c in fock.occupations
        )
        output[lowered] = output.get(lowered, 0j) + amplitude * math.sqrt(n)
    return Ket(output)


def create(state: Ket, mode: ModeId) -> Ket:
    """Apply the creation operator of ``mode`` (result not normalized)."""
    output: dict[FockState, complex] = {}
    for fock, amplitude in state:
        n = fock.count(mode)
        raised = FockState(fock.occupations + ((mode, 1),))
        output[raised] = output.get(raised, 0j) + amplitude * math.sqrt(n + 1)
    return Ket(output)


def permanent(m: ComplexMatrix | Sequence[Sequence[complex]]) -> complex:
    """
    Matrix permanent by Ryser's formula with Gray-code ordering.

    Runs in O(2^N N) time.

    Parameters
    ----------
    m : array-like
        Square N x N matrix, N <= 20

    Returns
    -------
    complex
        The permanent

    Raises
    ------
    ValueError
        If the matrix is not square or too large
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n > MAX_PERMANENT_SIZE:
        raise ValueError(
            f"Permanent limited to {MAX_PERMANENT_SIZE}x{MAX_PERMANENT_SIZE}, got {n}"
        )

    row_sums = np.zeros(n, dtype=np.complex128)
    subset = 0
    size = 0
    total = 0j
    for k in range(1, 1 << n):
        column = (k & -k).bit_length() - 1
        bit = 1 << column
        if subset & bit:
            subset ^= bit
            row_sums -= a[:, column]
            size -= 1
        else:
            subset |= bit
            row_sums += a[:, column]
            size += 1
        term = complex(np.prod(row_sums))
        total += -term if size % 2 else term
    return -total if n % 2 else total


def transition_amplitude(
    input_state: FockState, output_state: FockState, u: ModeTransform
) -> complex:
    """
    Bosonic transition amplitude <output| U |input> from a permanent.

    Parameters
    ----------
    input_state : FockState
        Input occupation, all photons in one internal mode
    output_state : FockState
        Output occupation, same internal mode as the input
    u : ModeTransform
        Unitary over the external channels

    Returns
    -------
    complex
        per(U[rows, cols]) / sqrt(prod n! prod m!), with rows repeated per
        output occupancy and columns per input occupancy

    Raises
    ------
    ValueError
        If photon numbers differ, exceed the limit, or the states use more
        than one internal mode
    """
    if input_state.total_n != output_state.total_n:
        raise ValueError(
            f"Photon number mismatch: input has {input_state.total_n}, "
            f"output has {output_state.total_n}"
        )
    if input_state.total_n > MAX_PHOTONS:
        raise ValueError(
            f"Transition amplitudes limited to {MAX_PHOTONS} photons, "
            f"got {input_state.total_n}"
        )
    internals = {m.internal for m in input_state.modes + output_state.modes}
    if len(internals) > 1:
        raise ValueError("Transition amplitudes need a single internal mode")
    if max(input_state.max_external, output_state.max_external) >= u.dimension:
        raise ValueError("State occupies a channel outside the transform")

    columns = [m.external for m, n in input_state.occupations for _ in range(n)]
    rows = [m.external for m, n in output_state.occupations for _ in range(n)]
    sub = u.matrix[np.ix_(rows, columns)]
    norm = math.sqrt(input_state.factorial_product() * output_state.factorial_product())
    return permanent(sub) / norm
