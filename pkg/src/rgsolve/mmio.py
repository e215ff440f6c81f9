"""MatrixMarket array-format reading and writing for dense matrices and vectors.

Files use the ``%%MatrixMarket matrix array real general`` header, values in
column-major order, one value per line. Vectors are stored as m x 1 matrices.
Writes are deterministic: the same data always produces byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .linalg import DenseMatrix

_HEADER_TOKENS = ("%%matrixmarket", "matrix", "array", "real", "general")


def write_array(path, values) -> None:
    """Write a 2-D array (or DenseMatrix) in MatrixMarket array format."""
    arr = values.entries if isinstance(values, DenseMatrix) else np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise UsageError(f"expected a 2-D array, got shape {arr.shape}")
    m, n = arr.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{m} {n}\n")
        for j in range(n):
            col = arr[:, j]
            for i in range(m):
                fh.write(repr(float(col[i])))
                fh.write("\n")


def write_matrix(path, a: DenseMatrix) -> None:
    write_array(path, a)


def write_vector(path, v) -> None:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise UsageError(f"expected a 1-D vector, got shape {arr.shape}")
    write_array(path, arr.reshape(-1, 1))


def read_array(path) -> np.ndarray:
    """Read a MatrixMarket array file into a 2-D float array."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        tokens = header.strip().lower().split()
        if tuple(tokens) != _HEADER_TOKENS:
            raise UsageError(f"unsupported MatrixMarket header: {header.strip()!r}")
        size_line = fh.readline()
        while size_line and size_line.lstrip().startswith("%"):
            size_line = fh.readline()
        parts = size_line.split()
        if len(parts) != 2:
            raise UsageError(f"malformed size line: {size_line.strip()!r}")
        m, n = int(parts[0]), int(parts[1])
        if m < 1 or n < 1:
            raise UsageError("matrix dimensions must be positive")
        values = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            values.extend(float(tok) for tok in line.split())
    if len(values) != m * n:
        raise UsageError(f"expected {m * n} values, found {len(values)}")
    arr = np.array(values, dtype=float).reshape((n, m)).T
    if not np.all(np.isfinite(arr)):
        raise UsageError("file contains non-finite values")
    return np.ascontiguousarray(arr)


def read_matrix(path) -> DenseMatrix:
    return DenseMatrix(read_array(path))


def read_vector(path) -> np.ndarray:
    arr = read_array(path)
    if arr.shape[1] != 1:
        raise UsageError(f"expected an m x 1 vector file, got shape {arr.shape}")
    return arr[:, 0].copy()
