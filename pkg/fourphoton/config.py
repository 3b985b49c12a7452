"""
Run configuration parsed from strict JSON.

Every key is either consumed or rejected. Angles are strings carrying a
unit suffix (``"13.7 deg"``, ``"0.25 rad"``) or the token ``"theta_star"``
for the exact four-photon magic angle; delays are micrometres.

Example
-------
.. code-block:: json

    {
      "source": {"kind": "e_over_a", "value": 0.5},
      "circuit": {"theta1": "theta_star", "theta2": "22.5 deg"},
      "sweep": {"variable": "phi", "from": "0 deg", "to": "355 deg", "steps": 72},
      "fit": {"model": "fringe"}
    }
"""

import json
import logging
import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .constants import DEFAULT_BALANCE_TOLERANCE, DEG_TO_RAD, THETA_BALANCED, THETA_STAR
from .errors import ConfigError
from .parallel import ParallelConfig
from .scan import ScanConfig
from .source import DelayModel, SchmidtSpec, schmidt_from_e_over_a
from .types import FitModelKind, ScanVariable, SourceKind

logger = logging.getLogger(__name__)

_NUMBER = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
_ANGLE_PATTERN = re.compile(rf"^\s*{_NUMBER}\s*(deg|rad)\s*$")
_LENGTH_PATTERN = re.compile(rf"^\s*{_NUMBER}\s*um\s*$")
_ANGLE_TOKENS = {"theta_star": THETA_STAR, "theta_balanced": THETA_BALANCED}

_TOP_KEYS = {
    "source",
    "circuit",
    "sweep",
    "delay",
    "pattern",
    "output",
    "seed",
    "sampling",
    "fit",
    "balance",
    "parallel",
}
_SWEEP_ONLY = {"circuit", "delay", "pattern", "sampling"}
_SECTION_KEYS = {
    "source": {"kind", "lambdas", "value", "counts"},
    "circuit": {"theta1", "phi", "theta2"},
    "sweep": {"variable", "from", "to", "steps"},
    "delay": {"delta_um", "coherence_length_um"},
    "output": {"table", "report"},
    "sampling": {"mean_counts_at_max"},
    "fit": {"model", "weighted", "free_phase"},
    "balance": {"tolerance"},
    "parallel": {"workers", "chunk_size"},
}


def parse_angle(value: Any, where: str = "angle") -> float:
    """
    Convert a unit-suffixed angle string to radians.

    Parameters
    ----------
    value : Any
        ``"<number> deg"``, ``"<number> rad"``, ``"theta_star"`` or
        ``"theta_balanced"``
    where : str, optional
        Key path used in error messages

    Returns
    -------
    float
        Angle in radians

    Raises
    ------
    ConfigError
        If the value is not a string or has no recognized unit
    """
    if not isinstance(value, str):
        raise ConfigError(
            f"{where}: angles need a unit suffix ('deg' or 'rad'), got {value!r}"
        )
    token = value.strip().lower()
    if token in _ANGLE_TOKENS:
        return _ANGLE_TOKENS[token]
    match = _ANGLE_PATTERN.match(token)
    if match is None:
        raise ConfigError(f"{where}: cannot parse angle {value!r}")
    number, unit = float(match.group(1)), match.group(2)
    return number * DEG_TO_RAD if unit == "deg" else number


def parse_length(value: Any, where: str = "length") -> float:
    """Micrometres from a number or a ``"<number> um"`` string."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a length in micrometres, got {value!r}")
    if isinstance(value, int | float):
        number = float(value)
    elif isinstance(value, str) and (match := _LENGTH_PATTERN.match(value)):
        number = float(match.group(1))
    else:
        raise ConfigError(f"{where}: expected a length in micrometres, got {value!r}")
    if not math.isfinite(number):
        raise ConfigError(f"{where}: length must be finite, got {value!r}")
    return number


def _section(data: Mapping[str, Any], name: str) -> dict[str, Any]:
    section = data.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"'{name}' must be an object, got {type(section).__name__}")
    unknown = sorted(set(section) - _SECTION_KEYS[name])
    if unknown:
        raise ConfigError(f"Unknown key(s) in '{name}': {', '.join(unknown)}")
    return section


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _flag(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where}: expected true or false, got {value!r}")
    return value


def _enum[E: (ScanVariable, SourceKind, FitModelKind)](
    enum: type[E], value: Any, where: str
) -> E:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    try:
        return enum.from_string(value)
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e


@dataclass(frozen=True, slots=True)
class SourceSettings:
    """
    Source section of a run config.

    Attributes
    ----------
    kind : SourceKind
        Kind of input state
    lambdas : tuple[float, ...] | None
        Schmidt weights
    e_over_a : float | None
        Effective mismatch parameter
    counts : tuple[int, ...] | None
        Fock input counts
    """

    kind: SourceKind = SourceKind.IDEAL
    lambdas: tuple[float, ...] | None = None
    e_over_a: float | None = None
    counts: tuple[int, ...] | None = None

    def schmidt_spec(self) -> SchmidtSpec:
        """
        Schmidt weights of a double-pair source.

        Raises
        ------
        ConfigError
            For Fock inputs or invalid weights
        """
        try:
            match self.kind:
                case SourceKind.IDEAL:
                    return SchmidtSpec((1.0,))
                case SourceKind.SCHMIDT:
                    return SchmidtSpec(self.lambdas or ())
                case SourceKind.E_OVER_A:
                    return schmidt_from_e_over_a(float(self.e_over_a or 0.0))
                case SourceKind.FOCK:
                    raise ConfigError("A Fock input has no Schmidt weights")
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"source: {e}") from e


@dataclass(frozen=True, slots=True)
class RunConfig:
    """
    Validated run configuration.

    Attributes
    ----------
    source : SourceSettings
        Input state settings
    scan : ScanConfig | None
        Scan to simulate, present when the config has a ``sweep`` section
    table_path, report_path : Path | None
        Output locations from the ``output`` section
    seed : int | None
        Seed for Poisson sampling
    mean_counts_at_max : float | None
        Poisson mean at the curve maximum
    fit_model : FitModelKind | None
        Model for ``fit``
    weighted : bool
        Poisson-weighted fits
    free_phase : bool
        Fringe fits with a free phase origin
    balance_tolerance : float
        |V2| bound for ``balance``
    parallel : ParallelConfig
        Row evaluation settings
    """

    source: SourceSettings
    scan: ScanConfig | None = None
    table_path: Path | None = None
    report_path: Path | None = None
    seed: int | None = None
    mean_counts_at_max: float | None = None
    fit_model: FitModelKind | None = None
    weighted: bool = False
    free_phase: bool = False
    balance_tolerance: float = DEFAULT_BALANCE_TOLERANCE
    parallel: ParallelConfig = field(default_factory=ParallelConfig, compare=False)

    def require_scan(self) -> ScanConfig:
        """
        The scan section.

        Raises
        ------
        ConfigError
            If the config has no ``sweep`` section
        """
        if self.scan is None:
            raise ConfigError("Config has no 'sweep' section to simulate")
        return self.scan


def _parse_source(data: Mapping[str, Any]) -> SourceSettings:
    section = _section(data, "source")
    kind = _enum(SourceKind, section.get("kind", "ideal"), "source.kind")
    lambdas = e_over_a = counts = None

    allowed = {
        SourceKind.IDEAL: set(),
        SourceKind.SCHMIDT: {"lambdas"},
        SourceKind.E_OVER_A: {"value"},
        SourceKind.FOCK: {"counts"},
    }[kind]
    extra = sorted(set(section) - {"kind"} - allowed)
    if extra:
        raise ConfigError(
            f"source kind '{kind.value}' does not take: {', '.join(extra)}"
        )
    missing = sorted(allowed - set(section))
    if missing:
        raise ConfigError(f"source kind '{kind.value}' needs: {', '.join(missing)}")

    if kind is SourceKind.SCHMIDT:
        raw = section["lambdas"]
        if not isinstance(raw, list):
            raise ConfigError(f"source.lambdas: expected a list, got {raw!r}")
        lambdas = tuple(_number(v, "source.lambdas") for v in raw)
    elif kind is SourceKind.E_OVER_A:
        e_over_a = _number(section["value"], "source.value")
    elif kind is SourceKind.FOCK:
        raw = section["counts"]
        if not isinstance(raw, list):
            raise ConfigError(f"source.counts: expected a list, got {raw!r}")
        counts = tuple(_integer(v, "source.counts") for v in raw)
        if any(c < 0 for c in counts) or not counts:
            raise ConfigError(
                f"source.counts: expected non-negative counts, got {raw!r}"
            )

    settings = SourceSettings(kind, lambdas, e_over_a, counts)
    if kind is not SourceKind.FOCK:
        settings.schmidt_spec()
    return settings


def _parse_scan(
    data: Mapping[str, Any], source: SourceSettings, delay: DelayModel
) -> ScanConfig | None:
    if "sweep" not in data:
        return None
    sweep = _section(data, "sweep")
    missing = sorted({"variable", "from", "to", "steps"} - set(sweep))
    if missing:
        raise ConfigError(f"sweep needs: {', '.join(missing)}")
    variable = _enum(ScanVariable, sweep["variable"], "sweep.variable")
    bound = parse_angle if variable.is_angle else parse_length
    start = bound(sweep["from"], "sweep.from")
    stop = bound(sweep["to"], "sweep.to")
    steps = _integer(sweep["steps"], "sweep.steps")

    circuit = _section(data, "circuit")
    if variable.value in circuit:
        raise ConfigError(
            f"circuit.{variable.value} conflicts with the {variable.value} sweep"
        )
    if variable is ScanVariable.DELAY and "delta_um" in _section(data, "delay"):
        raise ConfigError("delay.delta_um conflicts with the delay sweep")
    angles = {
        name: parse_angle(value, f"circuit.{name}") for name, value in circuit.items()
    }

    pattern = data.get("pattern")
    if pattern is not None:
        if not isinstance(pattern, list) or not pattern:
            raise ConfigError(f"pattern: expected a list of counts, got {pattern!r}")
        pattern = tuple(_integer(v, "pattern") for v in pattern)

    return ScanConfig.for_variable(
        variable,
        start,
        stop,
        steps,
        source=source.kind,
        lambdas=source.lambdas,
        e_over_a=source.e_over_a,
        fock_counts=source.counts,
        delay=delay,
        pattern=pattern,
        **angles,
    )


def _parse_delay(data: Mapping[str, Any]) -> DelayModel:
    section = _section(data, "delay")
    kwargs: dict[str, float] = {}
    if "delta_um" in section:
        kwargs["delta"] = parse_length(section["delta_um"], "delay.delta_um")
    if "coherence_length_um" in section:
        kwargs["coherence_length"] = parse_length(
            section["coherence_length_um"], "delay.coherence_length_um"
        )
    try:
        return DelayModel(**kwargs)
    except ValueError as e:
        raise ConfigError(f"delay: {e}") from e


def parse_run_config(data: Any, base_dir: Path | None = None) -> RunConfig:
    """
    Validate a decoded JSON document.

    Parameters
    ----------
    data : Any
        Decoded JSON; must be an object
    base_dir : Path | None, optional
        Directory that relative output paths are resolved against

    Returns
    -------
    RunConfig
        Validated configuration

    Raises
    ------
    ConfigError
        On unknown keys, wrong types, missing units or invalid values
    """
    if not isinstance(data, dict):
        raise ConfigError(f"Config must be a JSON object, got {type(data).__name__}")
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}")
    for name in _SECTION_KEYS:
        _section(data, name)

    source = _parse_source(data)
    delay = _parse_delay(data)
    if "sweep" not in data:
        stray = sorted(_SWEEP_ONLY & set(data))
        if stray:
            raise ConfigError(
                f"Key(s) used only by a sweep: {', '.join(stray)}; "
                "add a 'sweep' section or remove them"
            )
    try:
        scan = _parse_scan(data, source, delay)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e

    output = _section(data, "output")
    base = base_dir or Path(".")
    paths: dict[str, Path] = {}
    for key in ("table", "report"):
        if key in output:
            if not isinstance(output[key], str):
                raise ConfigError(f"output.{key}: expected a path string")
            paths[key] = base / output[key]

    seed = None
    if "seed" in data:
        seed = _integer(data["seed"], "seed")
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed: expected an unsigned 64-bit integer, got {seed}")

    sampling = _section(data, "sampling")
    mean_counts = None
    if "mean_counts_at_max" in sampling:
        mean_counts = _number(
            sampling["mean_counts_at_max"], "sampling.mean_counts_at_max"
        )
        if mean_counts < 0:
            raise ConfigError("sampling.mean_counts_at_max must be >= 0")

    fit_section = _section(data, "fit")
    fit_model = (
        _enum(FitModelKind, fit_section["model"], "fit.model")
        if "model" in fit_section
        else None
    )

    balance = _section(data, "balance")
    tolerance = DEFAULT_BALANCE_TOLERANCE
    if "tolerance" in balance:
        tolerance = _number(balance["tolerance"], "balance.tolerance")
        if tolerance < 0:
            raise ConfigError("balance.tolerance must be >= 0")

    parallel_section = _section(data, "parallel")
    try:
        parallel = ParallelConfig(
            n_workers=(
                _integer(parallel_section["workers"], "parallel.workers")
                if "workers" in parallel_section
                else None
            ),
            chunk_size=_integer(
                parallel_section.get("chunk_size", 16), "parallel.chunk_size"
            ),
        )
    except ValueError as e:
        raise ConfigError(f"parallel: {e}") from e

    return RunConfig(
        source=source,
        scan=scan,
        table_path=paths.get("table"),
        report_path=paths.get("report"),
        seed=seed,
        mean_counts_at_max=mean_counts,
        fit_model=fit_model,
        weighted=_flag(fit_section.get("weighted", False), "fit.weighted"),
        free_phase=_flag(fit_section.get("free_phase", False), "fit.free_phase"),
        balance_tolerance=tolerance,
        parallel=parallel,
    )


def load_run_config(path: str | Path) -> RunConfig:
    """
    Read and validate a JSON run config.

    Parameters
    ----------
    path : str or Path
        Config file; relative output paths resolve against its directory

    Returns
    -------
    RunConfig
        Validated configuration

    Raises
    ------
    ConfigError
        If the file is not valid JSON or fails validation
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e
    logger.debug("Loaded config %s", path)
    return parse_run_config(data, base_dir=path.parent)
