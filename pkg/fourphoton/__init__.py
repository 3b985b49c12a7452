"""
fourphoton - Four-photon interference simulator.

Exact Fock-space simulation of two photon pairs in linear-optical
interferometers with partially distinguishable internal modes, plus the
fitting toolkit used to read visibilities and source purity off the scans.
"""

from .config import RunConfig, load_run_config, parse_angle, parse_run_config
from .errors import ConfigError, FlatDataError, InvalidStateError, NumericalFailure
from .fitkit import (
    BalanceResult,
    DipModelParams,
    FitReport,
    FringeModelParams,
    ThetaModelParams,
    balance_theta1,
    eval_model,
    fit,
    fit_arrays,
    init_guess,
)
from .fock import (
    FockState,
    Ket,
    ModeId,
    ModeTransform,
    annihilate,
    apply_internal_isometry,
    apply_mode_transform,
    create,
    inner,
    make_fock,
    permanent,
    random_unitary,
    transition_amplitude,
)
from .optics import (
    BeamSplitter,
    Circuit,
    DetectionPattern,
    Element,
    HalfWavePlate,
    PhaseShifter,
    detect_prob,
    element_transform,
    interferometer,
    normally_ordered_moment,
    output_distribution,
    run_circuit,
)
from .parallel import ParallelConfig, ParallelScanEngine, parallel_map
from .report import AcceptanceCheck, AcceptanceReport, run_acceptance
from .scan import (
    ScanConfig,
    ScanTable,
    fringe_scan,
    fringe_visibility,
    hom_dip_scan,
    poissonize,
    run_scan,
    theta_scan,
)
from .source import (
    DelayModel,
    SchmidtSpec,
    SourceState,
    apply_delay,
    e_over_a,
    fock_input,
    ideal_two_pairs,
    schmidt_from_e_over_a,
    schmidt_two_pairs,
)
from .tableio import format_table, parse_table, read_table, write_json, write_table
from .types import FitModelKind, ScanVariable, SourceKind

__version__ = "1.0.0"
__all__ = [
    # Fock space
    "ModeId",
    "FockState",
    "Ket",
    "ModeTransform",
    "make_fock",
    "inner",
    "apply_mode_transform",
    "apply_internal_isometry",
    "annihilate",
    "create",
    "permanent",
    "transition_amplitude",
    "random_unitary",
    # Optical elements and detection
    "Element",
    "BeamSplitter",
    "HalfWavePlate",
    "PhaseShifter",
    "Circuit",
    "DetectionPattern",
    "element_transform",
    "interferometer",
    "run_circuit",
    "detect_prob",
    "output_distribution",
    "normally_ordered_moment",
    # Sources
    "SchmidtSpec",
    "DelayModel",
    "SourceState",
    "schmidt_two_pairs",
    "ideal_two_pairs",
    "e_over_a",
    "schmidt_from_e_over_a",
    "apply_delay",
    "fock_input",
    # Scans
    "ScanConfig",
    "ScanTable",
    "run_scan",
    "hom_dip_scan",
    "theta_scan",
    "fringe_scan",
    "poissonize",
    "fringe_visibility",
    "ParallelConfig",
    "ParallelScanEngine",
    "parallel_map",
    # Fitting
    "DipModelParams",
    "ThetaModelParams",
    "FringeModelParams",
    "FitReport",
    "BalanceResult",
    "fit",
    "fit_arrays",
    "init_guess",
    "eval_model",
    "balance_theta1",
    # Files and configuration
    "RunConfig",
    "parse_run_config",
    "load_run_config",
    "parse_angle",
    "format_table",
    "parse_table",
    "read_table",
    "write_table",
    "write_json",
    # Acceptance suite
    "AcceptanceCheck",
    "AcceptanceReport",
    "run_acceptance",
    # Enums and errors
    "ScanVariable",
    "FitModelKind",
    "SourceKind",
    "InvalidStateError",
    "ConfigError",
    "FlatDataError",
    "NumericalFailure",
]
