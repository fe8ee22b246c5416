"""Text I/O for dense CSV matrices and coordinate-triplet sparse files.

Dense files are comma-separated decimal text, one matrix row per line,
written with 17 significant digits so float64 values round-trip
bit-exactly.  Sparse files use the coordinate format: an optional run of
'%' comment lines, a "rows cols nnz" header line, then one "i j value"
line per entry with 1-based indices (duplicate entries are summed).
"""

import numpy as np

from .errors import FormatError
from .matops import as_matrix


def load_dense(path, has_header=False):
    """Read a dense CSV matrix; raises FormatError with the offending
    line (and column) on ragged or non-numeric content."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    start = 1 if has_header else 0
    rows = []
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if line.strip() == "":
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise FormatError(
                f"expected {width} columns, found {len(cells)}", line=lineno
            )
        row = []
        for colno, cell in enumerate(cells, start=1):
            try:
                row.append(float(cell))
            except ValueError:
                raise FormatError(
                    f"non-numeric token {cell.strip()!r}", line=lineno, column=colno
                ) from None
        rows.append(row)
    if not rows:
        raise FormatError("file contains no data rows", line=start + 1)
    return np.asarray(rows, dtype=float)


def save_dense(path, a):
    """Write a dense CSV matrix with 17 significant digits, LF endings."""
    a = as_matrix(a, "matrix")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in a:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def load_sparse_triplets(path):
    """Read a coordinate-format sparse matrix and densify it."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = None
    entries = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped == "" or stripped.startswith("%"):
            continue
        parts = stripped.split()
        if header is None:
            if len(parts) != 3:
                raise FormatError("header must be 'rows cols nnz'", line=lineno)
            try:
                header = tuple(int(p) for p in parts)
            except ValueError:
                raise FormatError("non-integer header field", line=lineno) from None
            if header[0] < 1 or header[1] < 1 or header[2] < 0:
                raise FormatError("header dimensions out of range", line=lineno)
            continue
        if len(parts) != 3:
            raise FormatError("entry must be 'i j value'", line=lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise FormatError("malformed entry", line=lineno) from None
        if not (1 <= i <= header[0] and 1 <= j <= header[1]):
            raise FormatError(
                f"index ({i}, {j}) outside {header[0]} x {header[1]}", line=lineno
            )
        entries.append((i - 1, j - 1, v))
    if header is None:
        raise FormatError("file contains no header line", line=1)
    if len(entries) != header[2]:
        raise FormatError(
            f"header declares {header[2]} entries, file has {len(entries)}",
            line=len(lines),
        )
    out = np.zeros((header[0], header[1]))
    for i, j, v in entries:
        out[i, j] += v
    return out
