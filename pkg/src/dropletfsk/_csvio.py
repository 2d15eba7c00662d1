"""Strict numeric CSV helpers used by every file format in the package."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParseError


def read_numeric_csv(path, header: Sequence[str], allow_empty: bool = False) -> np.ndarray:
    """Read a CSV with an exact header and finite float cells.

    Returns an array of shape (rows, len(header)). Raises ParseError with the
    offending 1-based line number on any deviation.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError(f"{path.name}: empty file, expected header {','.join(header)}", line=1)
        if [c.strip() for c in first] != list(header):
            raise ParseError(
                f"{path.name}: expected header {','.join(header)!r}, got {','.join(first)!r}", line=1
            )
        rows = []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path.name}: expected {len(header)} fields, got {len(row)}", line=lineno)
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise ParseError(f"{path.name}: non-numeric value in {row!r}", line=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError(f"{path.name}: non-finite value in {row!r}", line=lineno)
            rows.append(vals)
    if not rows and not allow_empty:
        raise ParseError(f"{path.name}: no data rows", line=2)
    return np.asarray(rows, dtype=float).reshape(len(rows), len(header))


def write_csv(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def fmt(v) -> str:
    """Shortest round-trippable text for numbers; ints stay ints."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
