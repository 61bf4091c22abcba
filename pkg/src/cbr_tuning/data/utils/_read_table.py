"""
Measurement table reader - shared parsing for every cbr-tuning input file.

All inputs are small UTF-8 CSV tables with optional ``#`` comment headers
carrying ``key=value`` metadata and an optional column-name row.

Usage
-----
Basic usage (quickstart):

    from cbr_tuning.data.utils._read_table import _read_table

    headers, df = _read_table("decay.csv", ("time_ps", "counts"), "decay histogram")
    print(headers.get("bin_width_ps"), len(df))

    # Source line of every data row, for error messages
    df["_line"]

Header syntax:

    # axis=wavelength_nm label=CBR after cycle 3
    # bin_width_ps=4 ; columns time_ps,counts
"""

import io
import logging
import os
import re
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ...exceptions import ParseError, ValidationError

logger = logging.getLogger(__name__)

LINE_COLUMN = "_line"

_COLUMNS_TOKEN = re.compile(r"\bcolumns\s*[:=]?\s*([A-Za-z_][\w]*(?:\s*,\s*[A-Za-z_][\w]*)+)")
_KEY_TOKEN = re.compile(r"([A-Za-z_][\w]*)\s*=")
_MISSING = {"", "nan", "NaN", "NAN", "na", "NA", "null"}


def _check_file(path: str, what: str, columns: Sequence[str]) -> str:
    file_path = os.path.abspath(os.fspath(path))
    if not os.path.exists(file_path):
        raise FileNotFoundError(
            f"{what} file not found: {file_path}\n"
            f"Expected a CSV file with columns: {','.join(columns)}"
        )
    if not os.access(file_path, os.R_OK):
        raise PermissionError(f"Cannot read {what} file: {file_path}")
    return file_path


def _parse_header(text: str, headers: Dict[str, str]) -> None:
    """Collect ``key=value`` pairs and a ``columns a,b`` token from one comment line."""
    match = _COLUMNS_TOKEN.search(text)
    if match:
        headers["columns"] = re.sub(r"\s+", "", match.group(1))
        text = text[: match.start()] + text[match.end() :]
    keys = list(_KEY_TOKEN.finditer(text))
    for current, following in zip(keys, keys[1:] + [None]):
        end = following.start() if following is not None else len(text)
        headers[current.group(1)] = text[current.end() : end].strip(" \t;,")


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return token.strip() in _MISSING
    return True


def _read_table(
    path,
    columns: Sequence[str],
    what: str,
    optional: Iterable[str] = (),
    text_columns: Iterable[str] = (),
    delimiter: str = ",",
    aliases: Optional[Dict[str, str]] = None,
) -> Tuple[Dict[str, str], pd.DataFrame]:
    """
    Read a comment-headed CSV table into a validated DataFrame.

    Parameters
    ----------
    path : str or os.PathLike
        File to read.
    columns : sequence of str
        Expected column order when the file has no column-name row.
    what : str
        Human-readable table kind used in messages.
    optional : iterable of str, optional
        Numeric columns that may be empty (stored as NaN). Every other
        numeric column must hold a finite number.
    text_columns : iterable of str, optional
        Columns kept as stripped strings.
    delimiter : str, optional
        Field separator.
    aliases : dict, optional
        Alternative column names mapped onto ``columns``.

    Returns
    -------
    dict
        Header ``key=value`` metadata.
    pandas.DataFrame
        Columns ``columns`` (numeric as float) plus ``_line``, the 1-based
        source line of each row.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    PermissionError
        If the file cannot be read.
    ParseError
        If the file is empty, a row has the wrong number of fields or a
        numeric field does not parse; the message names the line.
    ValidationError
        If a required numeric field holds NaN.
    """
    file_path = _check_file(path, what, columns)
    logger.info("Loading %s from: %s", what, file_path)
    with open(file_path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()

    headers: Dict[str, str] = {}
    names: Optional[List[str]] = None
    rows: List[str] = []
    row_lines: List[int] = []
    for number, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        if text.startswith("#"):
            _parse_header(text.lstrip("#"), headers)
            continue
        fields = [f.strip() for f in text.split(delimiter)]
        if names is None and not rows and not all(_is_number(f) for f in fields if f not in _MISSING):
            names = fields
            headers.setdefault("columns", ",".join(fields))
            continue
        rows.append(text)
        row_lines.append(number)

    if not rows:
        raise ParseError(f"{what} file contains no data rows: {file_path}", line=len(lines) or 1)

    if names is None:
        names = headers["columns"].split(",") if "columns" in headers else list(columns)
    alias_map = dict(aliases or {})
    names = [alias_map.get(n, n) for n in names]
    missing = [c for c in columns if c not in names and c not in optional]
    if missing:
        raise ParseError(f"Missing required columns in {what} file: {missing}", line=row_lines[0])

    widths = [len(r.split(delimiter)) for r in rows]
    bad = next((i for i, w in enumerate(widths) if w != len(names)), None)
    if bad is not None:
        raise ParseError(f"expected {len(names)} fields, found {widths[bad]}", line=row_lines[bad])

    try:
        df = pd.read_csv(
            io.StringIO("\n".join(rows)),
            sep=delimiter,
            header=None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        raise ParseError(f"{what} file is empty: {file_path}", line=1)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = row_lines[int(match.group(1)) - 1] if match and int(match.group(1)) <= len(row_lines) else None
        raise ParseError(f"Error parsing {what} file: {e}", line=line)

    df.columns = names

    text_set = set(text_columns)
    optional_set = set(optional)
    for name in columns:
        if name not in df.columns:
            df[name] = "" if name in text_set else np.nan
            continue
        if name in text_set:
            df[name] = df[name].astype(str).str.strip()
            continue
        raw = df[name].astype(str).str.strip()
        values = pd.to_numeric(raw, errors="coerce")
        unparsed = values.isna() & ~raw.isin(_MISSING)
        if unparsed.any():
            index = int(np.flatnonzero(unparsed.to_numpy())[0])
            raise ParseError(f"cannot parse {name} value {raw.iloc[index]!r}", line=row_lines[index])
        if name not in optional_set:
            empty = raw.isin(_MISSING)
            if empty.any():
                index = int(np.flatnonzero(empty.to_numpy())[0])
                raise ValidationError(f"line {row_lines[index]}: {name} is missing or NaN")
            infinite = ~np.isfinite(values.to_numpy(dtype=float))
            if infinite.any():
                index = int(np.flatnonzero(infinite)[0])
                raise ValidationError(f"line {row_lines[index]}: {name} is not finite")
        df[name] = values.astype(float)

    df = df[list(columns)].copy()
    df[LINE_COLUMN] = row_lines
    logger.info("Successfully processed %d %s records", len(df), what)
    return headers, df


def _header_float(headers: Dict[str, str], key: str, default: Optional[float] = None) -> Optional[float]:
    """Numeric header value, or ``default`` when absent."""
    if key not in headers:
        return default
    try:
        return float(headers[key])
    except ValueError:
        raise ParseError(f"header {key}={headers[key]!r} is not a number")
