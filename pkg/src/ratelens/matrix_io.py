"""CSV matrix files and JSON sidecars.

Matrix layout: the first row holds the y labels (top-left cell is the corner
tag ``x\\y``), the first column holds the x labels, and cell (i, j) holds the
value. UTF-8, ``.`` decimal separator, no thousands separators.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .probcore import Alphabet

__all__ = ["MatrixFormatError", "read_matrix_csv", "write_matrix_csv", "sidecar_path",
           "write_sidecar", "write_rows_csv"]

CORNER = "x\\y"


class MatrixFormatError(ValueError):
    pass


def _parse_label(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        v = float(text)
    except ValueError:
        return text
    return v if math.isfinite(v) else text


def _format_label(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _format_value(v: float) -> str:
    if float(v).is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(float(v))


def read_matrix_csv(path) -> tuple[np.ndarray, Alphabet, Alphabet]:
    """Parse a labelled matrix; errors name the offending cell."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(cell.strip() for cell in r)]
    if len(rows) < 2 or len(rows[0]) < 2:
        raise MatrixFormatError(f"{path}: empty matrix")
    header = rows[0]
    y_labels = [_parse_label(c.strip()) for c in header[1:]]
    x_labels, values = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise MatrixFormatError(
                f"{path}: row {i} has {len(row)} cells, header has {len(header)}"
            )
        x_labels.append(_parse_label(row[0].strip()))
        vals = []
        for j, cell in enumerate(row[1:], start=2):
            try:
                v = float(cell)
            except ValueError:
                raise MatrixFormatError(f"{path}: row {i}, column {j}: not a number: {cell!r}")
            if not math.isfinite(v):
                raise MatrixFormatError(f"{path}: row {i}, column {j}: non-finite value {cell!r}")
            vals.append(v)
        values.append(vals)
    try:
        xa, ya = Alphabet(tuple(x_labels)), Alphabet(tuple(y_labels))
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: {exc}")
    return np.array(values, dtype=float), xa, ya


def write_matrix_csv(path, values, x_alphabet: Alphabet, y_alphabet: Alphabet) -> None:
    values = np.asarray(values)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([CORNER] + [_format_label(v) for v in y_alphabet.labels])
        for lab, row in zip(x_alphabet.labels, values):
            w.writerow([_format_label(lab)] + [_format_value(v) for v in row])


def write_rows_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_format_value(v) if isinstance(v, (float, np.floating)) else v for v in r])


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_sidecar(path, payload: dict) -> Path:
    out = sidecar_path(path)
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
