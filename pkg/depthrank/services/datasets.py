"""
Dataset file ingestion and CSV emission.

A dataset file holds one observation per row and d numeric columns,
separated by commas, tabs, semicolons or whitespace. The first row is a
header iff any of its cells fails to parse as a number.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from depthrank.core.errors import DataFileError
from depthrank.schemas.power import format_number

logger = logging.getLogger(__name__)

DELIMITERS = (",", "\t", ";")


@dataclass(frozen=True, eq=False)
class DatasetFile:
    path: Path
    data: np.ndarray  # n×d
    header: Optional[List[str]] = None

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def size(self) -> int:
        return self.data.shape[0]


def _split(line: str, delimiter: Optional[str]) -> List[str]:
    if delimiter is None:
        return line.split()
    return [cell.strip() for cell in line.split(delimiter)]


def _detect_delimiter(line: str) -> Optional[str]:
    for delim in DELIMITERS:
        if delim in line:
            return delim
    return None


def _parses(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_dataset(text: str, source: str = "<string>", delimiter: Optional[str] = None) -> Tuple[np.ndarray, Optional[List[str]]]:
    """Parse dataset text into an n×d float array and the header, if any."""
    lines = [(no, line) for no, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise DataFileError(f"{source}: no observations", file=source)

    delim = delimiter if delimiter is not None else _detect_delimiter(lines[0][1])
    header = None
    first_cells = _split(lines[0][1], delim)
    if not all(_parses(cell) for cell in first_cells):
        header = first_cells
        lines = lines[1:]
        if not lines:
            raise DataFileError(f"{source}: header but no observations", file=source)

    width = len(header) if header is not None else len(_split(lines[0][1], delim))
    rows = []
    for no, line in lines:
        cells = _split(line, delim)
        if len(cells) != width:
            raise DataFileError(
                f"{source}:{no}: expected {width} columns, found {len(cells)}",
                file=source,
                line=no,
                expected=width,
                found=len(cells),
            )
        row = []
        for col, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                value = math.nan
            if not math.isfinite(value):
                raise DataFileError(
                    f"{source}:{no}:{col}: '{cell}' is not a finite number",
                    file=source,
                    line=no,
                    column=col,
                    cell=cell,
                )
            row.append(value)
        rows.append(row)
    return np.array(rows, dtype=float).reshape(len(rows), width), header


def read_dataset(path, delimiter: Optional[str] = None) -> DatasetFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFileError(f"{path}: cannot read file: {exc.strerror}", file=str(path)) from exc
    data, header = parse_dataset(text, str(path), delimiter)
    logger.debug(f"Read {data.shape[0]}x{data.shape[1]} sample from {path}")
    return DatasetFile(path=path, data=data, header=header)


def check_same_dim(a: DatasetFile, b: DatasetFile) -> None:
    if a.dim != b.dim:
        raise DataFileError(
            f"dimension mismatch: {a.path} has d={a.dim}, {b.path} has d={b.dim}",
            first=str(a.path),
            first_dim=a.dim,
            second=str(b.path),
            second_dim=b.dim,
        )


def format_rows(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text with floats at 17 significant digits."""
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(format_number(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return "\n".join(out) + "\n"


def depth_csv(depths: Sequence[float]) -> str:
    return format_rows(("row_index", "depth"), ((i, float(d)) for i, d in enumerate(depths)))


def write_dataset(path, data, header: Optional[Sequence[str]] = None) -> Path:
    """Write a sample as CSV, lossless at 17 significant digits."""
    X = np.atleast_2d(np.asarray(data, dtype=float))
    header = list(header) if header is not None else [f"x{j + 1}" for j in range(X.shape[1])]
    path = Path(path)
    path.write_text(format_rows(header, ([float(v) for v in row] for row in X)), encoding="utf-8")
    return path
