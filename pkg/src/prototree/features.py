"""Feature matrices and the dissimilarities computed from them.

Rows are observations, columns are features.  Rows with missing values
are dropped at load time and reported, never imputed.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .dissimilarity import DissimilarityMatrix
from .errors import ValidationError

# cell spellings treated as missing data (case-insensitive)
MISSING_TOKENS = frozenset({"", "na", "nan", "null"})


@dataclass(eq=False)
class FeatureMatrix:
    """n observations by p features, all finite."""

    values: np.ndarray = field(repr=False)
    row_labels: tuple[str, ...]
    column_names: tuple[str, ...] | None = None
    dropped_rows: tuple[str, ...] = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValidationError("feature matrix must be 2-dimensional")
        self.row_labels = tuple(str(lab) for lab in self.row_labels)
        if len(self.row_labels) != self.values.shape[0]:
            raise ValidationError(
                f"{len(self.row_labels)} row labels for "
                f"{self.values.shape[0]} rows"
            )
        if len(set(self.row_labels)) != len(self.row_labels):
            seen = set()
            dup = next(l for l in self.row_labels if l in seen or seen.add(l))
            raise ValidationError(f"duplicate row label {dup!r}")
        if self.column_names is not None:
            self.column_names = tuple(str(c) for c in self.column_names)
            if len(self.column_names) != self.values.shape[1]:
                raise ValidationError(
                    f"{len(self.column_names)} column names for "
                    f"{self.values.shape[1]} columns"
                )
        if not np.isfinite(self.values).all():
            i, j = np.argwhere(~np.isfinite(self.values))[0]
            raise ValidationError(
                f"non-finite value at row {self.row_labels[i]!r}, column {j}"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def load_features(path) -> FeatureMatrix:
    """Read a feature CSV: header of column names, one labelled row per line.

    Rows containing missing cells are dropped; their labels end up in
    ``dropped_rows`` and a summary warning is issued.  Malformed numbers
    and ragged rows are errors, not missing data.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValidationError(f"{path}: expected a header row and data rows")
    header = rows[0]
    if len(header) < 2:
        raise ValidationError(f"{path}: header must name at least one column")
    column_names = tuple(header[1:])
    p = len(column_names)
    labels: list[str] = []
    data: list[list[float]] = []
    dropped: list[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != p + 1:
            raise ValidationError(
                f"{path}: line {lineno} has {len(row)} cells, expected {p + 1}"
            )
        label, cells = row[0], row[1:]
        parsed: list[float] = []
        complete = True
        for j, cell in enumerate(cells):
            text = cell.strip()
            if text.lower() in MISSING_TOKENS:
                complete = False
                continue
            try:
                value = float(text)
            except ValueError:
                raise ValidationError(
                    f"{path}: line {lineno}, column {column_names[j]!r}: "
                    f"cannot parse {cell!r}"
                ) from None
            if not np.isfinite(value):
                complete = False
                continue
            parsed.append(value)
        if complete:
            labels.append(label)
            data.append(parsed)
        else:
            dropped.append(label)
    if dropped:
        warnings.warn(
            f"{path}: dropped {len(dropped)} row(s) with missing values: "
            + ", ".join(dropped[:10])
            + ("..." if len(dropped) > 10 else ""),
            stacklevel=2,
        )
    if not data:
        raise ValidationError(f"{path}: no complete rows left after dropping")
    return FeatureMatrix(
        values=np.array(data, dtype=np.float64),
        row_labels=tuple(labels),
        column_names=column_names,
        dropped_rows=tuple(dropped),
    )


def center_scale(fm: FeatureMatrix) -> FeatureMatrix:
    """Standardize columns to mean 0, sample standard deviation 1.

    Constant columns carry no information under scaling and are dropped
    with a warning; a matrix with only constant columns is an error.
    """
    means = fm.values.mean(axis=0)
    sds = fm.values.std(axis=0, ddof=1) if fm.n > 1 else np.zeros(fm.p)
    keep = sds > 0
    if not keep.any():
        raise ValidationError("all feature columns are constant; nothing to scale")
    if not keep.all():
        gone = (
            [fm.column_names[j] for j in np.flatnonzero(~keep)]
            if fm.column_names
            else [str(j) for j in np.flatnonzero(~keep)]
        )
        warnings.warn(
            f"dropped {len(gone)} constant column(s): " + ", ".join(gone),
            stacklevel=2,
        )
    scaled = (fm.values[:, keep] - means[keep]) / sds[keep]
    return FeatureMatrix(
        values=scaled,
        row_labels=fm.row_labels,
        column_names=(
            tuple(np.array(fm.column_names)[keep]) if fm.column_names else None
        ),
        dropped_rows=fm.dropped_rows,
    )


def correlation_dissimilarity(fm: FeatureMatrix) -> DissimilarityMatrix:
    """One minus the Pearson correlation between rows; range [0, 2]."""
    if fm.p < 2:
        raise ValidationError(
            "correlation dissimilarity needs at least 2 feature columns"
        )
    sds = fm.values.std(axis=1, ddof=1)
    flat = np.flatnonzero(sds == 0)
    if flat.size:
        raise ValidationError(
            f"row {fm.row_labels[flat[0]]!r} has zero variance; "
            f"correlation is undefined"
        )
    corr = np.corrcoef(fm.values)
    d = 1.0 - corr
    np.clip(d, 0.0, 2.0, out=d)  # 1 - corr can stray past [0,2] by one ulp
    np.fill_diagonal(d, 0.0)
    return DissimilarityMatrix.from_square(d, fm.row_labels)


def euclidean_dissimilarity(fm: FeatureMatrix) -> DissimilarityMatrix:
    """Pairwise l2 distances between rows."""
    return DissimilarityMatrix(
        n=fm.n,
        labels=fm.row_labels,
        values=pdist(fm.values, metric="euclidean"),
    )
