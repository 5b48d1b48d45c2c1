"""Matrix file formats: dense CSV with ``nan`` holes and MatrixMarket
coordinate files.

Floats are written with ``repr`` (shortest round-trip form), so write/read
cycles are bit-exact for finite values.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import MaskedMatrix, ObservationSet, as_matrix
from .errors import DataError, ParseError

__all__ = [
    "read_masked_csv",
    "write_masked_csv",
    "read_masked_mm",
    "write_masked_mm",
    "read_dense_csv",
    "write_dense_csv",
    "read_matrix",
    "write_matrix",
    "write_json",
]

MM_HEADER = "%%MatrixMarket matrix coordinate real general"


def _parse_float(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", line) from None


def read_masked_csv(path) -> MaskedMatrix:
    """Dense CSV where literal ``nan`` cells mark unobserved entries."""
    rows_out, obs_rows, obs_cols = [], [], []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = [t.strip() for t in line.split(",")]
            if width is None:
                width = len(tokens)
            elif len(tokens) != width:
                raise ParseError(f"expected {width} columns, got {len(tokens)}", lineno)
            values = []
            i = len(rows_out)
            for j, tok in enumerate(tokens):
                v = _parse_float(tok, lineno)
                if np.isnan(v):
                    values.append(0.0)
                elif np.isinf(v):
                    raise ParseError("non-finite value", lineno)
                else:
                    values.append(v)
                    obs_rows.append(i)
                    obs_cols.append(j)
            rows_out.append(values)
    if not rows_out:
        raise DataError(f"{path}: empty matrix file")
    values = np.asarray(rows_out, dtype=np.float64)
    mask = ObservationSet(values.shape, np.asarray(obs_rows), np.asarray(obs_cols))
    return MaskedMatrix(values, mask)


def write_masked_csv(m: MaskedMatrix, path) -> None:
    observed = m.mask.to_bool_mask()
    with open(path, "w") as fh:
        for i in range(m.shape[0]):
            cells = [
                repr(float(m.values[i, j])) if observed[i, j] else "nan"
                for j in range(m.shape[1])
            ]
            fh.write(",".join(cells) + "\n")


def read_masked_mm(path) -> MaskedMatrix:
    """MatrixMarket coordinate file of observed (i, j, value) triplets, 1-based."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise DataError(f"{path}: missing MatrixMarket header")
    header = lines[0].lower().split()
    if header[1:4] != ["matrix", "coordinate", "real"]:
        raise DataError(f"{path}: unsupported MatrixMarket type {lines[0]!r}")
    body = [
        (n, l) for n, l in enumerate(lines[1:], start=2) if l.strip() and not l.startswith("%")
    ]
    if not body:
        raise DataError(f"{path}: missing size line")
    size_line_no, size_line = body[0]
    parts = size_line.split()
    if len(parts) != 3:
        raise ParseError("size line must be 'n1 n2 nnz'", size_line_no)
    try:
        n1, n2, nnz = (int(p) for p in parts)
    except ValueError:
        raise ParseError("size line must contain integers", size_line_no) from None
    if len(body) - 1 != nnz:
        raise DataError(f"{path}: expected {nnz} entries, found {len(body) - 1}")
    values = np.zeros((n1, n2))
    rows, cols = [], []
    for lineno, line in body[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise ParseError("entry line must be 'i j value'", lineno)
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise ParseError("indices must be integers", lineno) from None
        v = _parse_float(parts[2], lineno)
        if not np.isfinite(v):
            raise ParseError("non-finite value", lineno)
        if not (0 <= i < n1 and 0 <= j < n2):
            raise ParseError(f"index ({i + 1}, {j + 1}) outside {n1}x{n2}", lineno)
        values[i, j] = v
        rows.append(i)
        cols.append(j)
    mask = ObservationSet((n1, n2), np.asarray(rows), np.asarray(cols))
    return MaskedMatrix(values, mask)


def write_masked_mm(m: MaskedMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(MM_HEADER + "\n")
        fh.write(f"{m.shape[0]} {m.shape[1]} {len(m.mask)}\n")
        vals = m.observed()
        for (i, j), v in zip(m.mask, vals):
            fh.write(f"{i + 1} {j + 1} {repr(float(v))}\n")


def read_dense_csv(path) -> np.ndarray:
    """Fully observed CSV matrix; any hole is an error."""
    m = read_masked_csv(path)
    if m.density != 1.0:
        raise DataError(f"{path}: matrix has unobserved entries")
    return np.array(m.values)


def write_dense_csv(x, path) -> None:
    x = as_matrix(x)
    with open(path, "w") as fh:
        for row in x:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path) -> MaskedMatrix:
    """Dispatch on suffix: .csv -> dense-with-nan, .mtx/.mm -> MatrixMarket."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    if path.suffix.lower() == ".csv":
        return read_masked_csv(path)
    if path.suffix.lower() in (".mtx", ".mm"):
        return read_masked_mm(path)
    raise DataError(f"unrecognized matrix format: {path.suffix!r} (use .csv or .mtx)")


def write_matrix(m: MaskedMatrix, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_masked_csv(m, path)
    elif path.suffix.lower() in (".mtx", ".mm"):
        write_masked_mm(m, path)
    else:
        raise DataError(f"unrecognized matrix format: {path.suffix!r} (use .csv or .mtx)")


def write_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")
