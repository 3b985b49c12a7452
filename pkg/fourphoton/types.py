"""
Type definitions for the fourphoton library.

Provides type-safe enums and type aliases shared by the simulator, the
fitting toolkit and the command line.
"""

from enum import Enum
from typing import Self

import numpy as np
import numpy.typing as npt


class _NamedEnum(Enum):
    """Enum with case-insensitive lookup by value."""

    @classmethod
    def from_string(cls, value: str) -> Self:
        """
        Convert a string to the matching enum member.

        Parameters
        ----------
        value : str
            Member value (case-insensitive)

        Returns
        -------
        Self
            The corresponding enum member

        Raises
        ------
        ValueError
            If the name is not recognized
        """
        value_lower = value.lower()
        for member in cls:
            if member.value == value_lower:
                return member
        raise ValueError(
            f"Unknown {cls.__name__}: {value}. "
            f"Valid options: {[m.value for m in cls]}"
        )


class ScanVariable(_NamedEnum):
    """
    Quantity swept by a scan.

    Attributes
    ----------
    DELAY : str
        Relative H/V delay in micrometres (HOM dip)
    THETA1 : str
        Rotation angle of the first half-wave plate
    THETA2 : str
        Rotation angle of the second half-wave plate (theta scan)
    PHI : str
        Phase-shifter phase (de Broglie fringe)
    """

    DELAY = "delay"
    THETA1 = "theta1"
    THETA2 = "theta2"
    PHI = "phi"

    @property
    def is_angle(self) -> bool:
        """Whether the variable is an angle (radians internally)."""
        return self is not ScanVariable.DELAY

    @property
    def scenario(self) -> str:
        """Scenario name written to scan table headers."""
        return _SCENARIOS[self]


_SCENARIOS = {
    ScanVariable.DELAY: "hom_dip",
    ScanVariable.THETA1: "theta1_scan",
    ScanVariable.THETA2: "theta_scan",
    ScanVariable.PHI: "fringe",
}


class FitModelKind(_NamedEnum):
    """
    Fit models.

    Attributes
    ----------
    DIP : str
        Gaussian dip in the relative delay
    THETA : str
        Half-wave-plate scan with temporal mismatch parameter E/A
    FRINGE : str
        Four-photon fringe with cos 4phi and cos 2phi terms
    """

    DIP = "dip"
    THETA = "theta"
    FRINGE = "fringe"


class SourceKind(_NamedEnum):
    """
    Kinds of input state a scan can be driven with.

    Attributes
    ----------
    IDEAL : str
        Two indistinguishable pairs, |2_H, 2_V>
    SCHMIDT : str
        Double pair with explicit Schmidt weights
    E_OVER_A : str
        Double pair built from an effective mismatch parameter
    FOCK : str
        Plain Fock input in a single internal mode
    """

    IDEAL = "ideal"
    SCHMIDT = "schmidt"
    E_OVER_A = "e_over_a"
    FOCK = "fock"


# Type aliases (PEP 695 syntax)
type ComplexMatrix = npt.NDArray[np.complex128]
type RealArray = npt.NDArray[np.float64]
type Pattern = tuple[int, ...]  # photon count per external channel
