"""Plain-text file formats for measurements, rotations, and results.

All formats are whitespace-separated with '.' decimals and LF line
endings; reals are written with 17 significant digits, which round-trips
IEEE doubles exactly.

* measurement file: header ``n m``, then one line per edge:
  ``i j r11 r12 r13 r21 r22 r23 r31 r32 r33`` (1-based, i < j);
* rotation file: header ``n``, then one line per node: ``i r11 .. r33``;
* outlier file: one ``i j`` pair per line;
* CSV outputs as documented on the individual writers.

On load, measurement blocks whose orthonormality defect exceeds 1e-6 are
projected onto the rotation group and counted (real pipelines produce
mildly non-orthonormal blocks); blocks within tolerance are kept bitwise
so that write-then-read is the identity.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import FileFormatError, RankDeficientInput
from .so3 import orthonormality_defect, project_to_so3
from .sync import RelativeMeasurementSet

SO3_LOAD_TOL = 1e-6


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_floats(tokens, path, lineno):
    try:
        values = [float(t) for t in tokens]
    except ValueError as exc:
        raise FileFormatError(f"{path}:{lineno}: bad real number ({exc})") from None
    if not all(np.isfinite(values)):
        raise FileFormatError(f"{path}:{lineno}: non-finite value")
    return values


def _parse_int(token, path, lineno):
    try:
        return int(token)
    except ValueError:
        raise FileFormatError(f"{path}:{lineno}: bad integer {token!r}") from None


def _data_lines(path):
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line:
                yield lineno, line.split()


def write_measurements(path, measurements: RelativeMeasurementSet) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{measurements.n} {len(measurements.edges)}\n")
        for i, j, R in measurements.edges:
            entries = " ".join(_fmt(v) for v in np.asarray(R, dtype=float).ravel())
            fh.write(f"{i} {j} {entries}\n")


def read_measurements(path) -> tuple:
    """Parse a measurement file.

    Returns ``(measurements, projected_count)`` where the count is the
    number of blocks that failed rotation validation and were projected.
    Connectivity is not checked here; callers that need a solvable graph
    validate it separately.
    """
    lines = _data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise FileFormatError(f"{path}: empty file") from None
    if len(header) != 2:
        raise FileFormatError(f"{path}:{lineno}: header must be 'n m'")
    n = _parse_int(header[0], path, lineno)
    m = _parse_int(header[1], path, lineno)
    if n < 1 or m < 0:
        raise FileFormatError(f"{path}:{lineno}: bad header values n={n} m={m}")

    edges = []
    seen = set()
    projected = 0
    for lineno, tokens in lines:
        if len(tokens) != 11:
            raise FileFormatError(f"{path}:{lineno}: expected 11 fields, got {len(tokens)}")
        i = _parse_int(tokens[0], path, lineno)
        j = _parse_int(tokens[1], path, lineno)
        if not (1 <= i < j <= n):
            raise FileFormatError(f"{path}:{lineno}: bad edge indices ({i}, {j}) for n={n}")
        if (i, j) in seen:
            raise FileFormatError(f"{path}:{lineno}: duplicate edge ({i}, {j})")
        seen.add((i, j))
        R = np.array(_parse_floats(tokens[2:], path, lineno)).reshape(3, 3)
        if orthonormality_defect(R) > SO3_LOAD_TOL:
            try:
                R = project_to_so3(R)
            except RankDeficientInput:
                raise FileFormatError(f"{path}:{lineno}: block is not a usable rotation") from None
            projected += 1
        edges.append((i, j, R))
    if len(edges) != m:
        raise FileFormatError(f"{path}: header promises {m} edges, found {len(edges)}")
    return RelativeMeasurementSet(n=n, edges=edges), projected


def write_rotations(path, rotations) -> None:
    rotations = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{rotations.shape[0]}\n")
        for k, R in enumerate(rotations, start=1):
            fh.write(f"{k} " + " ".join(_fmt(v) for v in R.ravel()) + "\n")


def read_rotations(path) -> tuple:
    """Parse a rotation file into an (n, 3, 3) array (index order
    normalized).  Returns ``(rotations, projected_count)``."""
    lines = _data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise FileFormatError(f"{path}: empty file") from None
    if len(header) != 1:
        raise FileFormatError(f"{path}:{lineno}: header must be a single count")
    n = _parse_int(header[0], path, lineno)
    if n < 1:
        raise FileFormatError(f"{path}:{lineno}: bad count {n}")

    rotations = np.full((n, 3, 3), np.nan)
    seen = set()
    projected = 0
    for lineno, tokens in lines:
        if len(tokens) != 10:
            raise FileFormatError(f"{path}:{lineno}: expected 10 fields, got {len(tokens)}")
        i = _parse_int(tokens[0], path, lineno)
        if not (1 <= i <= n):
            raise FileFormatError(f"{path}:{lineno}: index {i} out of range for n={n}")
        if i in seen:
            raise FileFormatError(f"{path}:{lineno}: duplicate index {i}")
        seen.add(i)
        R = np.array(_parse_floats(tokens[1:], path, lineno)).reshape(3, 3)
        if orthonormality_defect(R) > SO3_LOAD_TOL:
            try:
                R = project_to_so3(R)
            except RankDeficientInput:
                raise FileFormatError(f"{path}:{lineno}: block is not a usable rotation") from None
            projected += 1
        rotations[i - 1] = R
    if len(seen) != n:
        raise FileFormatError(f"{path}: expected {n} records, found {len(seen)}")
    return rotations, projected


def write_outlier_edges(path, pairs) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for i, j in sorted(pairs):
            fh.write(f"{i} {j}\n")


def read_outlier_edges(path) -> set:
    pairs = set()
    for lineno, tokens in _data_lines(path):
        if len(tokens) != 2:
            raise FileFormatError(f"{path}:{lineno}: expected 'i j'")
        i = _parse_int(tokens[0], path, lineno)
        j = _parse_int(tokens[1], path, lineno)
        pairs.add((i, j))
    return pairs


EVAL_CSV_HEADER = "method,n,mean_deg,median_deg,max_deg,runtime_s"
BENCH_CSV_HEADER = "method,variable,value,trial,mean_deg,median_deg,runtime_s"


def _csv_num(x: float) -> str:
    return format(float(x), ".9g")


def append_eval_csv(path, method: str, n: int, mean_deg, median_deg, max_deg, runtime_s) -> str:
    """Append one evaluation row; writes the header when creating the
    file.  Returns the row written."""
    row = ",".join(
        [str(method), str(int(n)), _csv_num(mean_deg), _csv_num(median_deg), _csv_num(max_deg), _csv_num(runtime_s)]
    )
    new_file = not os.path.exists(path)
    with open(path, "a", encoding="ascii", newline="\n") as fh:
        if new_file:
            fh.write(EVAL_CSV_HEADER + "\n")
        fh.write(row + "\n")
    return row


def bench_csv_row(row) -> str:
    """Render one sweep row in the benchmark CSV schema."""
    return ",".join(
        [
            row.method,
            row.variable,
            _csv_num(row.value),
            str(row.trial),
            _csv_num(row.mean_deg),
            _csv_num(row.median_deg),
            _csv_num(row.runtime_s),
        ]
    )
