"""
Scan table and report files.

Tables are CSV with a two-line header: ``# fourphoton v1 <scenario>`` and
the column names ``x,probability[,counts]``. Floats are written with 17
significant digits so files round-trip exactly.
"""

import io
import json
import logging
from pathlib import Path
from typing import Any

import pandas as pd

from .constants import FLOAT_FORMAT, FORMAT_TAG
from .errors import ConfigError
from .scan import ScanTable
from .types import ScanVariable

logger = logging.getLogger(__name__)

_SCENARIO_TO_VARIABLE = {v.scenario: v for v in ScanVariable}
_COLUMNS = ["x", "probability"]


def format_table(table: ScanTable) -> str:
    """
    Serialize a table to CSV text.

    Parameters
    ----------
    table : ScanTable
        Table to serialize

    Returns
    -------
    str
        Header line, column line and one line per row, ``\\n`` terminated
    """
    buffer = io.StringIO()
    buffer.write(f"# {FORMAT_TAG} {table.scenario}\n")
    table.to_dataframe().to_csv(
        buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return buffer.getvalue()


def write_table(table: ScanTable, path: str | Path) -> Path:
    """Write a table as CSV and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(format_table(table).encode("utf-8"))
    logger.debug("Wrote %d rows to %s", len(table), path)
    return path


def parse_table(text: str, source: str = "<table>") -> ScanTable:
    """
    Parse CSV text written by ``format_table``.

    Parameters
    ----------
    text : str
        File content
    source : str, optional
        Name used in error messages

    Returns
    -------
    ScanTable
        The table (without config metadata)

    Raises
    ------
    ConfigError
        If the header, columns or values are malformed
    """
    header, _, body = text.partition("\n")
    prefix = f"# {FORMAT_TAG} "
    if not header.startswith(prefix):
        raise ConfigError(f"{source}: missing '# {FORMAT_TAG} <scenario>' header")
    scenario = header[len(prefix) :].strip()
    if scenario not in _SCENARIO_TO_VARIABLE:
        raise ConfigError(
            f"{source}: unknown scenario '{scenario}'. "
            f"Valid options: {sorted(_SCENARIO_TO_VARIABLE)}"
        )

    try:
        df = pd.read_csv(io.StringIO(body), float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"{source}: cannot parse CSV ({e})") from e

    columns = list(df.columns)
    if columns not in (_COLUMNS, [*_COLUMNS, "counts"]):
        raise ConfigError(
            f"{source}: expected columns x,probability[,counts], "
            f"got {','.join(map(str, columns))}"
        )
    if df.isna().any().any():
        raise ConfigError(f"{source}: missing values")

    counts = None
    if "counts" in df:
        if not pd.api.types.is_integer_dtype(df["counts"]):
            raise ConfigError(f"{source}: counts must be integers")
        counts = tuple(int(c) for c in df["counts"])

    try:
        return ScanTable(
            _SCENARIO_TO_VARIABLE[scenario],
            tuple(float(v) for v in df["x"]),
            tuple(float(v) for v in df["probability"]),
            counts,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{source}: {e}") from e


def read_table(path: str | Path) -> ScanTable:
    """Read a CSV table written by ``write_table``."""
    path = Path(path)
    return parse_table(path.read_text(encoding="utf-8"), source=str(path))


def format_json(payload: Any) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(payload: Any, path: str | Path) -> Path:
    """Write a JSON document and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(format_json(payload).encode("utf-8"))
    return path
