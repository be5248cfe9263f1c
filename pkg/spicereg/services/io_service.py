"""
CSV and model-file plumbing for the command layer.

CSV dialect: comma-separated, `.` decimal, optional single header row
(detected by a non-numeric first row). Rows are streamed in chunks so
that fitting never holds the whole file.
"""

from pathlib import Path
from typing import Iterator, Optional, Tuple, Union
import logging
import sys

import numpy as np
import pandas as pd

from spicereg.config import get_settings
from spicereg.errors import DataError
from spicereg.services.spice_service import SpiceModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _open_reader(path: PathLike, skip: int, chunk_rows: int):
    try:
        return pd.read_csv(
            path,
            header=None,
            skiprows=skip,
            dtype=str,
            chunksize=chunk_rows,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except FileNotFoundError as e:
        raise DataError(f"file not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise DataError("no rows") from e


def has_header(path: PathLike) -> bool:
    """True if the first row holds a non-numeric field"""
    try:
        first = pd.read_csv(path, header=None, nrows=1, dtype=str, skipinitialspace=True)
    except FileNotFoundError as e:
        raise DataError(f"file not found: {path}") from e
    except pd.errors.EmptyDataError:
        return False
    values = first.iloc[0]
    return bool(pd.to_numeric(values, errors="coerce").isna().any())


def iter_csv_blocks(path: PathLike, width: Optional[int] = None,
                    chunk_rows: Optional[int] = None) -> Iterator[np.ndarray]:
    """
    Stream a numeric CSV as float blocks.

    Args:
        path: CSV file
        width: required number of columns; taken from the first row when None
        chunk_rows: rows per block (settings.CSV_CHUNK_ROWS by default)

    Yields:
        Arrays of shape (rows, width)

    Raises:
        DataError: with the 1-based file line of the first bad row
    """
    chunk_rows = chunk_rows or get_settings().CSV_CHUNK_ROWS
    header = has_header(path)
    offset = 2 if header else 1

    try:
        for chunk in _open_reader(path, 1 if header else 0, chunk_rows):
            chunk = chunk.dropna(how="all")
            if chunk.empty:
                continue
            if width is None:
                width = chunk.shape[1]
            numeric = chunk.apply(pd.to_numeric, errors="coerce")
            bad_rows = numeric.isna().any(axis=1)
            if chunk.shape[1] != width:
                raise DataError(f"line {int(chunk.index[0]) + offset}: expected {width} fields, got {chunk.shape[1]}")
            if bad_rows.any():
                row = int(bad_rows.idxmax())
                raise DataError(f"line {row + offset}: could not parse {width} numeric fields")
            block = numeric.to_numpy(dtype=float)
            if not np.all(np.isfinite(block)):
                row = int(chunk.index[np.flatnonzero(~np.isfinite(block).all(axis=1))[0]])
                raise DataError(f"line {row + offset}: non-finite value")
            yield block
    except pd.errors.ParserError as e:
        raise DataError(f"malformed CSV: {e}") from e


def iter_samples(path: PathLike, d: Optional[int] = None,
                 chunk_rows: Optional[int] = None) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Stream (X block, y block) pairs from a CSV of d input columns then y"""
    width = None if d is None else d + 1
    seen = False
    for block in iter_csv_blocks(path, width, chunk_rows):
        if block.shape[1] < 2:
            raise DataError("expected at least one input column and a target column")
        seen = True
        yield block[:, :-1], block[:, -1]
    if not seen:
        raise DataError("no rows")


def read_table(path: PathLike, width: Optional[int] = None) -> np.ndarray:
    blocks = list(iter_csv_blocks(path, width))
    if not blocks:
        raise DataError("no rows")
    return np.vstack(blocks)


def read_dataset(path: PathLike, d: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Whole CSV as (X, y); the last column is the target"""
    table = read_table(path, None if d is None else d + 1)
    if table.shape[1] < 2:
        raise DataError("expected at least one input column and a target column")
    return table[:, :-1], table[:, -1]


def read_inputs(path: PathLike, d: int) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Rows of d inputs, optionally followed by a target column.

    Returns:
        (X, y) with y None when the file has exactly d columns
    """
    table = read_table(path)
    if table.shape[1] == d:
        return table, None
    if table.shape[1] == d + 1:
        return table[:, :d], table[:, d]
    raise DataError(f"expected {d} or {d + 1} columns, got {table.shape[1]}")


def write_frame(frame: pd.DataFrame, out: Optional[PathLike]) -> None:
    """CSV to a file, or to stdout when out is None or '-'"""
    if out is None or str(out) == "-":
        frame.to_csv(sys.stdout, index=False)
    else:
        frame.to_csv(out, index=False)
        logger.info(f"Wrote {len(frame)} rows to {out}")


def save_model(model: SpiceModel, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(model.to_json(), encoding="utf-8")
    logger.info(f"Saved model (n={model.n}, p={model.p}) to {path}")
    return path


def load_model(path: PathLike) -> SpiceModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise DataError(f"model file not found: {path}") from e
    return SpiceModel.from_json(text)
