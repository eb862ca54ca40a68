"""Tidy-table serialization: CSV with '#' metadata lines, or JSON."""

from typing import IO, Any, Dict, Optional, Sequence, Union
import csv
import io
import json

import numpy as np
import pandas as pd

FLOAT_FORMAT = "%.17g"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def _metadata_lines(metadata: Dict[str, Any]) -> str:
    lines = []
    for key in sorted(metadata):
        rendered = json.dumps(metadata[key], sort_keys=True, default=_json_default)
        lines.append(f"# {key}: {rendered}\n")
    return "".join(lines)


def render_table(table: pd.DataFrame, fmt: str = "csv", metadata: Optional[Dict[str, Any]] = None) -> str:
    metadata = metadata or {}
    if fmt == "json":
        rows = [
            {k: (v.item() if isinstance(v, np.generic) else v) for k, v in row.items()}
            for row in table.to_dict(orient="records")
        ]
        payload = {"metadata": metadata, "rows": rows}
        return json.dumps(payload, indent=2, default=_json_default) + "\n"
    buffer = io.StringIO()
    buffer.write(_metadata_lines(metadata))
    table.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    return buffer.getvalue()


def write_table(
    table: pd.DataFrame,
    fmt: str = "csv",
    metadata: Optional[Dict[str, Any]] = None,
    path: Optional[str] = None,
    stream: Optional[IO[str]] = None,
) -> None:
    text = render_table(table, fmt, metadata)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    elif stream is not None:
        stream.write(text)


def read_table(source: Union[str, IO[str]]) -> pd.DataFrame:
    """Parse a CSV written by ``write_table``, skipping metadata lines."""
    return pd.read_csv(source, skiprows=_metadata_rows(source), float_precision="round_trip")


def _metadata_rows(source: Union[str, IO[str]]):
    if isinstance(source, str):
        with open(source, encoding="utf-8") as f:
            head = f.readlines()
    else:
        position = source.tell()
        head = source.readlines()
        source.seek(position)
    count = 0
    for line in head:
        if not line.startswith("#"):
            break
        count += 1
    return count


def pivot_wide(table: pd.DataFrame, index: Sequence[str], columns: Sequence[str], values: str) -> pd.DataFrame:
    """One column per combination of ``columns`` values, labelled ``name=value``."""
    wide = table.pivot_table(index=list(index), columns=list(columns), values=values, sort=False)
    if isinstance(wide.columns, pd.MultiIndex):
        wide.columns = [":".join(f"{name}={level}" for name, level in zip(columns, key)) for key in wide.columns]
    else:
        wide.columns = [f"{columns[0]}={key}" for key in wide.columns]
    return wide.reset_index()
