"""
Acceptance suite reproducing the four-photon interference results.

Each check compares a measured number with its expected value under a
stated tolerance. The suite is deterministic: every random draw comes from a
fixed seed.
"""

import itertools
import logging
import math
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from .constants import (
    DEG_TO_RAD,
    RAD_TO_DEG,
    T_STAR,
    T_STAR_LOW,
    T_THREE_PHOTON,
    THETA_STAR,
)
from .fitkit import balance_theta1, eval_model, fit, fit_arrays
from .fitkit.models import DipModelParams, FringeModelParams
from .fock import (
    FockState,
    Ket,
    ModeId,
    apply_mode_transform,
    random_unitary,
    transition_amplitude,
)
from .optics import (
    BeamSplitter,
    detect_prob,
    normally_ordered_moment,
    output_distribution,
)
from .parallel import ParallelConfig
from .scan import (
    ScanConfig,
    ScanTable,
    fringe_scan,
    poissonize,
    run_scan,
    theta_scan,
)
from .source import (
    DelayModel,
    SchmidtSpec,
    apply_delay,
    fock_input,
    ideal_two_pairs,
    schmidt_from_e_over_a,
)
from .tableio import format_table
from .types import ScanVariable, SourceKind

logger = logging.getLogger(__name__)

REPORT_SEED = 20040101
_EQUAL_PAIR = (math.sqrt(0.5), math.sqrt(0.5))
_FULL_TURN = 2.0 * math.pi
_SCAN_BUDGET_S = 1.0

CHECK_NAMES = (
    "splitter_coefficients",
    "four_photon_hom_zero",
    "distinguishable_baseline",
    "two_photon_hom",
    "three_photon_hom",
    "fringe_law",
    "fringe_period",
    "fringe_v4",
    "fringe_v2",
    "theta_scan_shape",
    "theta_scan_minima_deg",
    "e_over_a_fit",
    "e_over_a_r2",
    "e_over_a_min_ratio",
    "fringe_recovery_uneven",
    "fringe_coverage_uneven",
    "fringe_recovery_balanced",
    "fringe_coverage_balanced",
    "dip_recovery",
    "balance_ideal_theta1_deg",
    "balance_ideal_v2",
    "balance_equal_v2",
    "balance_equal_v4",
    "balance_mild_v4",
    "permanent_oracle",
    "moment_identity",
    "completeness",
    "byte_identical_outputs",
    "scan_runtime_s",
)


@dataclass(frozen=True, slots=True)
class AcceptanceCheck:
    """
    One measured-versus-expected comparison.

    Attributes
    ----------
    name : str
        Check identifier
    measured : float
        Value obtained from the simulator
    expected : float
        Reference value, or the lower bound of a one-sided check
    tolerance : float
        Allowed deviation
    passed : bool
        Whether the deviation is within tolerance
    detail : str
        Short description
    one_sided : bool
        Whether only ``measured >= expected - tolerance`` is required
    """

    name: str
    measured: float
    expected: float
    tolerance: float
    passed: bool
    detail: str = ""
    one_sided: bool = False

    @classmethod
    def compare(
        cls,
        name: str,
        measured: float,
        expected: float,
        tolerance: float,
        detail: str = "",
    ) -> "AcceptanceCheck":
        """Check ``|measured - expected| <= tolerance``."""
        passed = bool(abs(measured - expected) <= tolerance)
        return cls(
            name, float(measured), float(expected), float(tolerance), passed, detail
        )

    @classmethod
    def at_least(
        cls, name: str, measured: float, bound: float, detail: str = ""
    ) -> "AcceptanceCheck":
        """Check ``measured >= bound``."""
        passed = bool(measured >= bound)
        return cls(name, float(measured), float(bound), 0.0, passed, detail, True)

    def with_tolerance(self, tolerance: float) -> "AcceptanceCheck":
        """Re-evaluate the check under another tolerance."""
        if tolerance < 0:
            raise ValueError(f"Tolerance must be non-negative, got {tolerance}")
        if self.one_sided:
            passed = self.measured >= self.expected - tolerance
        else:
            passed = abs(self.measured - self.expected) <= tolerance
        return AcceptanceCheck(
            self.name,
            self.measured,
            self.expected,
            float(tolerance),
            bool(passed),
            self.detail,
            self.one_sided,
        )


@dataclass(frozen=True, slots=True)
class AcceptanceReport:
    """
    Outcome of the acceptance suite.

    Attributes
    ----------
    checks : tuple[AcceptanceCheck, ...]
        Individual checks in run order
    runtime_s : float
        Wall-clock time of the suite
    """

    checks: tuple[AcceptanceCheck, ...]
    runtime_s: float = field(default=0.0, compare=False)

    @property
    def all_passed(self) -> bool:
        """Whether every check passed."""
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[AcceptanceCheck]:
        """Checks that failed."""
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> AcceptanceCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dataframe(self) -> pd.DataFrame:
        """One row per check."""
        return pd.DataFrame(
            {
                "check": [c.name for c in self.checks],
                "measured": [c.measured for c in self.checks],
                "expected": [c.expected for c in self.checks],
                "tolerance": [c.tolerance for c in self.checks],
                "passed": [c.passed for c in self.checks],
                "detail": [c.detail for c in self.checks],
            }
        )

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready summary; the runtime is left out so output is stable."""
        return {
            "all_passed": self.all_passed,
            "checks": [
                {
                    "name": c.name,
                    "measured": c.measured,
                    "expected": c.expected,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }

    def format_text(self) -> str:
        """Fixed-width pass/fail table."""
        lines = [
            f"{'check':<28} {'measured':>24} {'expected':>24} "
            f"{'tolerance':>10}  result"
        ]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"{c.name:<28} {c.measured:>24.17g} {c.expected:>24.17g} "
                f"{c.tolerance:>10.1e}  {status}"
            )
        passed = sum(c.passed for c in self.checks)
        lines.append(f"{passed}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


def two_pair_splitter_amplitudes(t: float) -> dict[tuple[int, int], float]:
    """
    Closed-form output amplitudes of |2, 2> at a splitter of transmissivity t.

    Returns
    -------
    dict[tuple[int, int], float]
        Amplitude per output pattern (n_A, n_B)
    """
    r = 1.0 - t
    outer = math.sqrt(6.0) * t * r
    odd = math.sqrt(6.0 * t * r) * (t - r)
    return {
        (4, 0): outer,
        (3, 1): odd,
        (2, 2): (t - r) ** 2 - 2.0 * t * r,
        (1, 3): -odd,
        (0, 4): outer,
    }


def _split(state: Ket, t: float) -> Ket:
    return apply_mode_transform(state, BeamSplitter(t).transform())


def _two_pairs(t: float) -> Ket:
    return _split(Ket.basis(FockState.from_counts((2, 2))), t)


def _phase_sweep(start: float, points: int) -> ScanConfig:
    stop = start + _FULL_TURN * (points - 1) / points
    return ScanConfig.for_variable(ScanVariable.PHI, start, stop, points)


def _check_splitter_coefficients(rng: np.random.Generator) -> list[AcceptanceCheck]:
    deviation = 0.0
    for t in rng.uniform(0.0, 1.0, 100):
        out = _two_pairs(float(t))
        for counts, expected in two_pair_splitter_amplitudes(float(t)).items():
            measured = out.amplitude(FockState.from_counts(counts))
            deviation = max(deviation, abs(measured - expected))
    return [
        AcceptanceCheck.compare(
            "splitter_coefficients", deviation, 0.0, 1e-12, "|2,2>, 100 random T"
        )
    ]


def _check_hom_zero() -> list[AcceptanceCheck]:
    worst = max(detect_prob(_two_pairs(t), (2, 2)) for t in (T_STAR, T_STAR_LOW))
    far = apply_delay(ideal_two_pairs(), DelayModel(delta=1e6))
    baseline = detect_prob(_split(far.ket, T_STAR), (2, 2))
    return [
        AcceptanceCheck.compare(
            "four_photon_hom_zero", worst, 0.0, 1e-12, "T=(3+-sqrt3)/6"
        ),
        AcceptanceCheck.compare(
            "distinguishable_baseline", baseline, 0.5, 1e-9, "fully delayed pairs"
        ),
    ]


def _check_intro_regressions() -> list[AcceptanceCheck]:
    two = _split(fock_input((1, 1)).ket, 0.5)
    three = _split(fock_input((2, 1)).ket, T_THREE_PHOTON)
    return [
        AcceptanceCheck.compare(
            "two_photon_hom", detect_prob(two, (1, 1)), 0.0, 1e-12, "|1,1>, T=1/2"
        ),
        AcceptanceCheck.compare(
            "three_photon_hom", detect_prob(three, (2, 1)), 0.0, 1e-12, "|2,1>, T=2/3"
        ),
    ]


def _check_fringe() -> list[AcceptanceCheck]:
    table = fringe_scan(_phase_sweep(0.0, 72))
    phi = table.x_array()
    ideal = (1.0 + np.cos(4.0 * phi)) / 8.0
    y = np.asarray(table.probability)
    deviation = float(np.max(np.abs(y - ideal)))

    shifted = np.asarray(fringe_scan(_phase_sweep(math.pi / 2, 72)).probability)
    period = float(np.max(np.abs(shifted - y)))
    report = fit(table, "fringe")
    return [
        AcceptanceCheck.compare("fringe_law", deviation, 0.0, 1e-12, "(1+cos4phi)/8"),
        AcceptanceCheck.compare("fringe_period", period, 0.0, 1e-12, "period pi/2"),
        AcceptanceCheck.compare("fringe_v4", report["v4"], 1.0, 1e-9, "ideal pairs"),
        AcceptanceCheck.compare("fringe_v2", report["v2"], 0.0, 1e-9, "ideal pairs"),
    ]


def _theta_probability(theta: float) -> float:
    cfg = ScanConfig.for_variable(ScanVariable.THETA2, theta, theta + 1e-3, 2)
    return theta_scan(cfg, ParallelConfig(n_workers=1)).probability[0]


def _check_theta_scan() -> list[AcceptanceCheck]:
    cfg = ScanConfig.for_variable(ScanVariable.THETA2, 0.0, math.pi / 2, 181)
    table = theta_scan(cfg)
    s = np.sin(4.0 * table.x_array()) ** 2
    y = np.asarray(table.probability)
    shape = float(np.max(np.abs(y - (1.0 - 1.5 * s) ** 2)))

    worst = 0.0
    for published in (13.68, 31.32, 58.68, 76.32):
        center = published * DEG_TO_RAD
        found = minimize_scalar(
            _theta_probability,
            bounds=(center - DEG_TO_RAD, center + DEG_TO_RAD),
            method="bounded",
            options={"xatol": 1e-10},
        )
        worst = max(worst, abs(float(found.x) * RAD_TO_DEG - published))
    return [
        AcceptanceCheck.compare(
            "theta_scan_shape", shape, 0.0, 1e-12, "(1-1.5sin^2 4t)^2"
        ),
        AcceptanceCheck.compare(
            "theta_scan_minima_deg", worst, 0.0, 0.01, "zeros of the theta scan"
        ),
    ]


def _check_e_over_a() -> list[AcceptanceCheck]:
    equal = {"source": SourceKind.SCHMIDT, "lambdas": _EQUAL_PAIR}
    cfg = ScanConfig.for_variable(
        ScanVariable.THETA2, 0.0, math.pi / 2, 181, **equal
    )
    report = fit(theta_scan(cfg), "theta")
    ends = run_scan(
        ScanConfig.for_variable(ScanVariable.THETA2, 0.0, THETA_STAR, 2, **equal)
    )
    ratio = ends.probability[1] / ends.probability[0]
    return [
        AcceptanceCheck.compare(
            "e_over_a_fit", report["e_over_a"], 0.5, 1e-6, "two equal Schmidt modes"
        ),
        AcceptanceCheck.at_least("e_over_a_r2", report.r2, 1.0 - 1e-9, "theta fit"),
        AcceptanceCheck.compare(
            "e_over_a_min_ratio", ratio, 1.0 / 9.0, 1e-9, "P(theta*)/P(0)"
        ),
    ]


def _fringe_table(params: FringeModelParams, points: int) -> ScanTable:
    phi = _FULL_TURN * np.arange(points) / points
    y = eval_model("fringe", params, phi)
    return ScanTable(ScanVariable.PHI, tuple(phi), tuple(y / np.max(y)))


def _poisson_coverage(params: FringeModelParams, rng: np.random.Generator) -> float:
    table = _fringe_table(params, 36)
    trials = 200
    hits = 0
    for seed in rng.integers(0, 2**31, trials):
        report = fit(poissonize(table, 1000.0, int(seed)), "fringe", weighted=True)
        hits += all(
            abs(report[name] - truth) <= 3.0 * report.stderr[name]
            for name, truth in (("v4", params.v4), ("v2", params.v2))
        )
    return hits / trials


def _check_fit_recovery(rng: np.random.Generator) -> list[AcceptanceCheck]:
    checks = []
    phi = _FULL_TURN * np.arange(36) / 36
    for label, params in (
        ("uneven", FringeModelParams(100.0, 0.62, 0.39)),
        ("balanced", FringeModelParams(100.0, 0.59, -0.03)),
    ):
        report = fit_arrays(phi, eval_model("fringe", params, phi), "fringe")
        deviation = max(
            abs(report["v4"] - params.v4), abs(report["v2"] - params.v2)
        )
        checks.append(
            AcceptanceCheck.compare(f"fringe_recovery_{label}", deviation, 0.0, 1e-9)
        )
        checks.append(
            AcceptanceCheck.at_least(
                f"fringe_coverage_{label}",
                _poisson_coverage(params, rng),
                0.95,
                "3 sigma, 200 Poisson replicates",
            )
        )

    dip = DipModelParams.from_fwhm(1000.0, 0.88, 0.0, 196.0)
    delay = np.linspace(-600.0, 600.0, 121)
    report = fit_arrays(delay, eval_model("dip", dip, delay), "dip")
    fwhm = report.derived()["fwhm"]
    relative = max(abs(report["visibility"] / 0.88 - 1.0), abs(fwhm / 196.0 - 1.0))
    checks.append(
        AcceptanceCheck.compare("dip_recovery", relative, 0.0, 1e-6, "V=0.88, 196um")
    )
    return checks


def _check_balance() -> list[AcceptanceCheck]:
    ideal = balance_theta1(SchmidtSpec((1.0,)))
    equal = balance_theta1(SchmidtSpec(_EQUAL_PAIR))
    mild = balance_theta1(schmidt_from_e_over_a(0.8))
    return [
        AcceptanceCheck.compare(
            "balance_ideal_theta1_deg",
            ideal.theta1_deg,
            THETA_STAR * RAD_TO_DEG,
            0.05,
        ),
        AcceptanceCheck.compare("balance_ideal_v2", ideal.v2, 0.0, 1e-9),
        AcceptanceCheck.compare("balance_equal_v2", equal.v2, 0.0, 0.02, "E/A=0.5"),
        AcceptanceCheck.compare("balance_equal_v4", equal.v4, 0.5, 1e-6, "E/A=0.5"),
        AcceptanceCheck.at_least("balance_mild_v4", mild.v4, 0.5, "E/A=0.8"),
    ]


def _random_four_photon_state(rng: np.random.Generator) -> Ket:
    modes = [ModeId(e, i) for e in (0, 1) for i in (0, 1)]
    terms = []
    for occupation in itertools.product(range(5), repeat=len(modes)):
        if sum(occupation) == 4:
            amplitude = complex(rng.standard_normal(), rng.standard_normal())
            terms.append((FockState(zip(modes, occupation, strict=True)), amplitude))
    return Ket(terms).normalized()


def _check_oracles(rng: np.random.Generator) -> list[AcceptanceCheck]:
    deviation = 0.0
    for _ in range(50):
        u = random_unitary(2, rng)
        for n in range(1, 5):
            for a in range(n + 1):
                source = FockState.from_counts((a, n - a))
                out = apply_mode_transform(Ket.basis(source), u)
                for b in range(n + 1):
                    target = FockState.from_counts((b, n - b))
                    oracle = transition_amplitude(source, target, u)
                    deviation = max(deviation, abs(oracle - out.amplitude(target)))

    moment = 0.0
    completeness = 0.0
    for _ in range(200):
        state = apply_mode_transform(
            _random_four_photon_state(rng), random_unitary(2, rng)
        )
        gap = normally_ordered_moment(state) - 4.0 * detect_prob(state, (2, 2))
        moment = max(moment, abs(gap))
        total = math.fsum(output_distribution(state).values())
        completeness = max(completeness, abs(total - 1.0))
    return [
        AcceptanceCheck.compare(
            "permanent_oracle", deviation, 0.0, 1e-10, "up to four photons"
        ),
        AcceptanceCheck.compare(
            "moment_identity", moment, 0.0, 1e-12, "200 random states"
        ),
        AcceptanceCheck.compare(
            "completeness", completeness, 0.0, 1e-12, "sum over patterns"
        ),
    ]


def _check_determinism() -> list[AcceptanceCheck]:
    cfg = ScanConfig.for_variable(
        ScanVariable.DELAY,
        -500.0,
        500.0,
        100,
        source=SourceKind.SCHMIDT,
        lambdas=(0.5, 0.5, 0.5, 0.5),
    )
    start = time.perf_counter()
    serial = run_scan(cfg, ParallelConfig(n_workers=1))
    elapsed = time.perf_counter() - start
    threaded = run_scan(cfg, ParallelConfig(n_workers=4, chunk_size=7))

    same_scan = format_table(serial) == format_table(threaded)
    sampled = [
        format_table(poissonize(t, 1000.0, REPORT_SEED)) for t in (serial, threaded)
    ]
    identical = same_scan and sampled[0] == sampled[1]
    logger.info("100-row dip scan took %.3f s", elapsed)
    # pass flag only; the wall time goes to the log
    within_budget = float(elapsed <= _SCAN_BUDGET_S)
    return [
        AcceptanceCheck.compare("byte_identical_outputs", float(identical), 1.0, 0.0),
        AcceptanceCheck.compare(
            "scan_runtime_s",
            within_budget,
            1.0,
            0.0,
            f"100-row dip, four Schmidt modes, budget {_SCAN_BUDGET_S:g} s",
        ),
    ]


def run_acceptance(
    tolerances: Mapping[str, float] | None = None,
    seed: int = REPORT_SEED,
) -> AcceptanceReport:
    """
    Run every acceptance check.

    Parameters
    ----------
    tolerances : Mapping[str, float] | None, optional
        Per-check tolerance overrides by check name
    seed : int, optional
        Seed for all random draws

    Returns
    -------
    AcceptanceReport
        Checks with measured and expected values

    Raises
    ------
    ValueError
        If an override names an unknown check or is negative
    """
    overrides = dict(tolerances or {})
    unknown = sorted(set(overrides) - set(CHECK_NAMES))
    if unknown:
        raise ValueError(f"Unknown acceptance checks: {', '.join(unknown)}")
    for name, tolerance in overrides.items():
        if tolerance < 0:
            raise ValueError(f"Tolerance for {name} must be non-negative")

    rng = np.random.Generator(np.random.PCG64(seed))
    start = time.perf_counter()
    groups: list[Callable[[], list[AcceptanceCheck]]] = [
        lambda: _check_splitter_coefficients(rng),
        _check_hom_zero,
        _check_intro_regressions,
        _check_fringe,
        _check_theta_scan,
        _check_e_over_a,
        lambda: _check_fit_recovery(rng),
        _check_balance,
        lambda: _check_oracles(rng),
        _check_determinism,
    ]
    checks: list[AcceptanceCheck] = []
    for group in groups:
        checks.extend(group())

    checks = [
        c.with_tolerance(overrides[c.name]) if c.name in overrides else c
        for c in checks
    ]

    report = AcceptanceReport(tuple(checks), time.perf_counter() - start)
    for c in report.failures:
        logger.warning(
            "Check %s failed: measured %r, expected %r (tolerance %g)",
            c.name,
            c.measured,
            c.expected,
            c.tolerance,
        )
    return report
