"""Pairwise dissimilarities in condensed form, with CSV and binary IO.

The condensed layout matches the scipy convention: for ``n`` observations
the value for pair ``(i, j)`` with ``i < j`` sits at index
``i*n - i*(i+1)//2 + j - i - 1``.  Only the upper triangle is stored; the
diagonal is implicitly zero.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

#: Magic bytes of the binary dissimilarity format (see docs/formats.md).
PDM_MAGIC = b"PDM1"

#: Relative tolerance for symmetry checks when loading square CSV matrices.
SYMMETRY_RTOL = 1e-12


def condensed_index(n: int, i: int, j: int) -> int:
    """Index of pair ``(i, j)`` in a condensed vector of ``n`` observations."""
    if i == j:
        raise ValueError("diagonal is not stored in condensed form")
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + j - i - 1


def condensed_pair(n: int, idx: int) -> tuple[int, int]:
    """Inverse of :func:`condensed_index`: recover ``(i, j)`` with ``i < j``."""
    if not 0 <= idx < n * (n - 1) // 2:
        raise ValueError(f"condensed index {idx} out of range for n={n}")
    # Row i owns indices [offset(i), offset(i) + n-i-1); solve by walking rows.
    i = 0
    row_start = 0
    while idx >= row_start + n - i - 1:
        row_start += n - i - 1
        i += 1
    j = idx - row_start + i + 1
    return i, j


@dataclass(eq=False)
class DissimilarityMatrix:
    """Symmetric pairwise dissimilarities with row labels.

    Parameters
    ----------
    n : int
        Number of observations (at least 2).
    labels : tuple of str
        Unique, non-empty row labels, one per observation.
    values : np.ndarray
        Condensed upper-triangle vector of length ``n*(n-1)//2``; all
        entries finite and non-negative.
    """

    n: int
    labels: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        self.labels = tuple(self.labels)
        validate_dissimilarity(self.n, self.labels, self.values)

    def lookup(self, i: int, j: int) -> float:
        """Dissimilarity between observations ``i`` and ``j`` (0 on diagonal)."""
        if i == j:
            return 0.0
        return float(self.values[condensed_index(self.n, i, j)])

    def to_square(self) -> np.ndarray:
        """Expand to a full ``(n, n)`` symmetric matrix with zero diagonal."""
        from scipy.spatial.distance import squareform

        return squareform(self.values, checks=False)

    @classmethod
    def from_square(cls, matrix: np.ndarray, labels) -> "DissimilarityMatrix":
        """Build from a square symmetric matrix, keeping the upper triangle."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError(f"matrix is not square: shape {matrix.shape}")
        n = matrix.shape[0]
        iu = np.triu_indices(n, k=1)
        return cls(n=n, labels=tuple(labels), values=matrix[iu])

    def index_of(self, label: str) -> int:
        return self.labels.index(label)


def validate_dissimilarity(n: int, labels: tuple[str, ...], values: np.ndarray) -> None:
    """Check the DissimilarityMatrix invariants, naming the first offender."""
    if n < 2:
        raise ValidationError(f"need at least 2 observations, got n={n}")
    if len(labels) != n:
        raise ValidationError(f"expected {n} labels, got {len(labels)}")
    seen: dict[str, int] = {}
    for idx, lab in enumerate(labels):
        if not isinstance(lab, str) or lab == "":
            raise ValidationError(f"label at position {idx} is empty or not a string")
        if lab in seen:
            raise ValidationError(
                f"duplicate label {lab!r} at positions {seen[lab]} and {idx}"
            )
        seen[lab] = idx
    expected = n * (n - 1) // 2
    if values.shape != (expected,):
        raise ValidationError(
            f"condensed vector has length {values.shape}, expected ({expected},)"
        )
    bad = ~np.isfinite(values)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        i, j = condensed_pair(n, k)
        raise ValidationError(
            f"non-finite dissimilarity {values[k]} at pair ({labels[i]!r}, {labels[j]!r})"
        )
    neg = values < 0
    if neg.any():
        k = int(np.flatnonzero(neg)[0])
        i, j = condensed_pair(n, k)
        raise ValidationError(
            f"negative dissimilarity {values[k]} at pair ({labels[i]!r}, {labels[j]!r})"
        )


# ---------------------------------------------------------------------------
# CSV format: square matrix with a label header row and a label first column.
# ---------------------------------------------------------------------------

def load_dissimilarity_csv(path) -> DissimilarityMatrix:
    """Load a square dissimilarity matrix from CSV.

    Layout: first row is ``<corner>,label_1,...,label_n``; each following
    row is ``label_i,v_i1,...,v_in``.  The matrix must be symmetric within
    ``SYMMETRY_RTOL`` relative tolerance and have a zero diagonal; the
    upper triangle is kept as canonical.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = rows[0][1:]
    n = len(header)
    if n < 2:
        raise ValidationError(f"{path}: need at least 2 columns, got {n}")
    if len(rows) - 1 != n:
        raise ValidationError(
            f"{path}: matrix is not square: {len(rows) - 1} data rows for {n} columns"
        )
    matrix = np.empty((n, n), dtype=np.float64)
    for r, row in enumerate(rows[1:]):
        if len(row) != n + 1:
            raise ValidationError(
                f"{path}: row {r + 2} has {len(row)} cells, expected {n + 1}"
            )
        if row[0] != header[r]:
            raise ValidationError(
                f"{path}: row label {row[0]!r} at row {r + 2} does not match "
                f"column label {header[r]!r}"
            )
        for c, cell in enumerate(row[1:]):
            try:
                matrix[r, c] = float(cell)
            except ValueError:
                raise ValidationError(
                    f"{path}: cell ({header[r]!r}, {header[c]!r}) is not a number: {cell!r}"
                ) from None

    for i in range(n):
        if matrix[i, i] != 0.0:
            raise ValidationError(
                f"{path}: diagonal entry ({header[i]!r}, {header[i]!r}) is "
                f"{matrix[i, i]!r}, expected 0"
            )
    # First asymmetric cell in row-major order of the upper triangle.
    scale = np.maximum(np.abs(matrix), np.abs(matrix.T))
    asym = np.abs(matrix - matrix.T) > SYMMETRY_RTOL * scale
    if asym.any():
        i, j = map(int, np.argwhere(asym & np.triu(np.ones_like(asym), k=1))[0])
        raise ValidationError(
            f"{path}: matrix is asymmetric at ({header[i]!r}, {header[j]!r}): "
            f"{matrix[i, j]!r} vs {matrix[j, i]!r}"
        )
    return DissimilarityMatrix.from_square(matrix, header)


def save_dissimilarity_csv(dm: DissimilarityMatrix, path) -> None:
    """Write the square CSV form using shortest round-trip float text."""
    square = dm.to_square()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *dm.labels])
        for i, lab in enumerate(dm.labels):
            writer.writerow([lab, *(repr(v) for v in square[i].tolist())])


# ---------------------------------------------------------------------------
# Binary format PDM1 (see docs/formats.md for the byte layout).
# ---------------------------------------------------------------------------

def load_dissimilarity_binary(path) -> DissimilarityMatrix:
    """Load the PDM1 binary format; values are taken bit-exactly."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _parse_pdm1(data, source=str(path))


def _parse_pdm1(data: bytes, source: str = "<bytes>") -> DissimilarityMatrix:
    if len(data) < 12 or data[:4] != PDM_MAGIC:
        raise ValidationError(f"{source}: not a PDM1 file (bad magic)")
    (n,) = struct.unpack_from("<Q", data, 4)
    m = n * (n - 1) // 2
    offset = 12
    if len(data) < offset + 8 * m:
        raise ValidationError(f"{source}: truncated value block (n={n})")
    values = np.frombuffer(data, dtype="<f8", count=m, offset=offset).astype(
        np.float64, copy=True
    )
    offset += 8 * m
    labels = []
    for k in range(n):
        if len(data) < offset + 4:
            raise ValidationError(f"{source}: truncated label record {k}")
        (length,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if len(data) < offset + length:
            raise ValidationError(f"{source}: truncated label record {k}")
        labels.append(data[offset : offset + length].decode("utf-8"))
        offset += length
    if offset != len(data):
        raise ValidationError(f"{source}: {len(data) - offset} trailing bytes")
    return DissimilarityMatrix(n=int(n), labels=tuple(labels), values=values)


def save_dissimilarity_binary(dm: DissimilarityMatrix, path) -> None:
    with open(path, "wb") as fh:
        fh.write(PDM_MAGIC)
        fh.write(struct.pack("<Q", dm.n))
        fh.write(np.ascontiguousarray(dm.values, dtype="<f8").tobytes())
        for lab in dm.labels:
            raw = lab.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)


def load_dissimilarity(path, format: str = "csv") -> DissimilarityMatrix:
    """Dispatch to the CSV or binary loader by ``format``."""
    if format == "csv":
        return load_dissimilarity_csv(path)
    if format == "binary":
        return load_dissimilarity_binary(path)
    raise ValueError(f"unknown dissimilarity format {format!r}")


def dissimilarity_to_bytes(dm: DissimilarityMatrix) -> bytes:
    """PDM1 serialization in memory (used for digests and tests)."""
    buf = io.BytesIO()
    buf.write(PDM_MAGIC)
    buf.write(struct.pack("<Q", dm.n))
    buf.write(np.ascontiguousarray(dm.values, dtype="<f8").tobytes())
    for lab in dm.labels:
        raw = lab.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
    return buf.getvalue()
