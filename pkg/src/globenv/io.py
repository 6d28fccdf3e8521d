"""Reading and writing curve sets, samples and factor tables as CSV.

Curve-set files have one row per grid component.  One-dimensional grids
start with an ``r`` column, two-dimensional grids with ``x,y,width,height``;
then come the observed curves ``obs_1..obs_m`` followed by the simulated
curves ``sim_1..sim_n``.  Values are written with ``repr`` so that a write
followed by a read restores every float bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .curves import ArgGrid, CurveSet
from .errors import HeaderError, ParseError
from .ftests import FactorTable

__all__ = [
    "read_curve_set",
    "write_curve_set",
    "read_samples",
    "write_samples",
    "read_factor_table",
    "read_labels",
    "result_to_json",
    "write_json",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def _open_rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = [[cell.strip() for cell in row] for row in csv.reader(fh)]
    rows = [r for r in rows if any(cell for cell in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    return rows


def _parse_float(cell: str, path, line: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{path}: line {line}: not a number: {cell!r}") from None


def _curve_columns(header: list[str], path) -> int:
    """Validate obs_1..obs_m,sim_1..sim_n naming; return the observed count."""
    m = 0
    i = 0
    while i < len(header) and header[i] == f"obs_{i + 1}":
        i += 1
    m = i
    j = 0
    while i < len(header) and header[i] == f"sim_{j + 1}":
        i += 1
        j += 1
    if i != len(header) or m + j < 2:
        raise HeaderError(f"{path}: curve columns must be named obs_1..obs_m,sim_1..sim_n")
    return m


def read_curve_set(path) -> CurveSet:
    """Read a curve set from a CSV file."""
    rows = _open_rows(path)
    header = rows[0]
    if header[:1] == ["r"]:
        coord = 1
    elif header[:4] == ["x", "y", "width", "height"]:
        coord = 4
    else:
        raise HeaderError(f"{path}: header must start with 'r' or 'x,y,width,height'")
    obs_count = _curve_columns(header[coord:], path)

    width = len(header)
    data = np.empty((len(rows) - 1, width))
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ParseError(f"{path}: line {ln}: expected {width} cells, found {len(row)}")
        data[ln - 2] = [_parse_float(cell, path, ln) for cell in row]

    if coord == 1:
        grid = ArgGrid.one_d(data[:, 0])
    else:
        grid = ArgGrid.two_d(data[:, 0], data[:, 1], data[:, 2], data[:, 3])
    return CurveSet(grid, data[:, coord:].T, obs_count)


def write_curve_set(curve_set: CurveSet, path) -> None:
    """Write a curve set as CSV, bit-for-bit recoverable."""
    grid = curve_set.grid
    m = curve_set.obs_count
    n = curve_set.s - m
    names = [f"obs_{i + 1}" for i in range(m)] + [f"sim_{i + 1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if grid.is_2d:
            w.writerow(["x", "y", "width", "height"] + names)
            coords = grid.pixels
        else:
            w.writerow(["r"] + names)
            coords = grid.values[:, None]
        for k in range(grid.size):
            row = [_fmt(v) for v in coords[k]]
            row += [_fmt(v) for v in curve_set.values[:, k]]
            w.writerow(row)


def read_samples(path) -> tuple[list[np.ndarray], list[str]]:
    """Read one sample per column; blank cells make samples ragged."""
    rows = _open_rows(path)
    header = rows[0]
    if not header or any(not name for name in header):
        raise HeaderError(f"{path}: sample columns need names")
    cols: list[list[float]] = [[] for _ in header]
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) > len(header):
            raise ParseError(f"{path}: line {ln}: more cells than header columns")
        for c, cell in enumerate(row):
            if cell:
                cols[c].append(_parse_float(cell, path, ln))
    return [np.asarray(c) for c in cols], list(header)


def write_samples(samples, names, path) -> None:
    samples = [np.asarray(s, dtype=float).ravel() for s in samples]
    depth = max(s.size for s in samples)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names))
        for i in range(depth):
            w.writerow([_fmt(s[i]) if i < s.size else "" for s in samples])


def read_factor_table(path) -> FactorTable:
    """Read factors, one row per curve; numeric columns become continuous."""
    rows = _open_rows(path)
    header = rows[0]
    if not header or any(not name for name in header):
        raise HeaderError(f"{path}: factor columns need names")
    body = rows[1:]
    if not body:
        raise ParseError(f"{path}: no factor rows")
    for ln, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}: line {ln}: expected {len(header)} cells, found {len(row)}")
    mapping = {}
    for c, name in enumerate(header):
        cells = [row[c] for row in body]
        try:
            mapping[name] = np.asarray([float(v) for v in cells])
        except ValueError:
            mapping[name] = np.asarray(cells, dtype=object)
    return FactorTable.from_mapping(mapping)


def read_labels(path) -> list[str]:
    """Read a single column of group labels with a header row."""
    rows = _open_rows(path)
    if len(rows[0]) != 1:
        raise HeaderError(f"{path}: group files hold exactly one labelled column")
    labels = []
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) != 1 or not row[0]:
            raise ParseError(f"{path}: line {ln}: expected one label")
        labels.append(row[0])
    if not labels:
        raise ParseError(f"{path}: no labels")
    return labels


def result_to_json(result) -> str:
    """Serialise any result object carrying ``to_dict`` to pretty JSON."""
    payload = result.to_dict() if hasattr(result, "to_dict") else result
    return json.dumps(payload, indent=2) + "\n"


def write_json(result, path) -> None:
    Path(path).write_text(result_to_json(result))
