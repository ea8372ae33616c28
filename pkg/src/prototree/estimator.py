"""scikit-learn style facade over the clustering core.

Two estimators: a transformer that turns feature matrices into pairwise
dissimilarities, and a clusterer that fits the prototype dendrogram and
exposes a flat cut as ``labels_``.  Both follow the usual contract:
params set in ``__init__``, state learned in ``fit`` with a trailing
underscore, ``get_params``/``set_params`` inherited.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .agglomerative import LINKAGES, agglomerate
from .cuts import DEFAULT_TOP_K, cut_at_height, cut_top_k, dynamic_cut
from .dissimilarity import DissimilarityMatrix
from .errors import ValidationError
from .features import (
    FeatureMatrix,
    center_scale,
    correlation_dissimilarity,
    euclidean_dissimilarity,
)

METRICS = ("correlation", "euclidean")


def as_feature_matrix(X, labels=None) -> FeatureMatrix:
    """Coerce an (n, p) array or FeatureMatrix; labels default to row indices."""
    if isinstance(X, FeatureMatrix):
        if labels is not None:
            raise ValidationError("labels argument conflicts with FeatureMatrix input")
        return X
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2d feature array, got shape {arr.shape}")
    if labels is None:
        labels = tuple(str(i) for i in range(arr.shape[0]))
    return FeatureMatrix(values=arr, row_labels=tuple(labels))


def as_dissimilarity(X, labels=None) -> DissimilarityMatrix:
    """Coerce input to a DissimilarityMatrix.

    Accepts a DissimilarityMatrix, a square symmetric (n, n) matrix, or a
    condensed vector of length n(n-1)/2.  Labels default to row indices.
    """
    if isinstance(X, DissimilarityMatrix):
        if labels is not None:
            raise ValidationError(
                "labels argument conflicts with DissimilarityMatrix input"
            )
        return X
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        if arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"matrix is not square: shape {arr.shape}")
        if labels is None:
            labels = tuple(str(i) for i in range(arr.shape[0]))
        return DissimilarityMatrix.from_square(arr, tuple(labels))
    if arr.ndim == 1:
        # invert m = n(n-1)/2 and insist it lands on an integer
        n = int(round((1 + np.sqrt(1 + 8 * arr.size)) / 2))
        if n * (n - 1) // 2 != arr.size:
            raise ValidationError(
                f"1d input of length {arr.size} is not a condensed matrix"
            )
        if labels is None:
            labels = tuple(str(i) for i in range(n))
        return DissimilarityMatrix(n=n, labels=tuple(labels), values=arr)
    raise ValidationError(f"cannot interpret array of shape {arr.shape}")


class PairwiseDissimilarity(TransformerMixin, BaseEstimator):
    """Compute pairwise dissimilarities from observation feature vectors.

    Parameters
    ----------
    metric : {"correlation", "euclidean"}
        ``correlation`` is 1 minus the Pearson correlation of rows.
    scale : bool, default False
        Center and scale columns (mean 0, sample sd 1) first.
    """

    def __init__(self, metric: str = "correlation", scale: bool = False):
        self.metric = metric
        self.scale = scale

    def fit(self, X, y=None):
        if self.metric not in METRICS:
            raise ValidationError(
                f"metric must be one of {METRICS}, got {self.metric!r}"
            )
        self.n_features_in_ = as_feature_matrix(X).p
        return self

    def transform(self, X) -> np.ndarray:
        """Return the square (n, n) dissimilarity matrix."""
        return self.transform_dissimilarity(X).to_square()

    def transform_dissimilarity(self, X, labels=None) -> DissimilarityMatrix:
        """Same as transform but keeps labels and the condensed layout."""
        check_is_fitted(self, "n_features_in_")
        fm = as_feature_matrix(X, labels)
        if self.scale:
            fm = center_scale(fm)
        if self.metric == "correlation":
            return correlation_dissimilarity(fm)
        return euclidean_dissimilarity(fm)


class PrototypeAgglomerative(ClusterMixin, BaseEstimator):
    """Agglomerative clustering with a prototype at every merge.

    Fitting builds the full dendrogram (``dendrogram_``); ``labels_``
    holds the flat clustering from the configured cut, so the estimator
    drops into pipelines even though the tree is the real product.

    Parameters
    ----------
    linkage : {"minimax", "complete"}
    cut : {"top_k", "height", "dynamic"}
        How to flatten the tree for ``labels_``.
    k : int, default 10
        Cluster count for ``cut="top_k"``; clamped to n.
    height : float, optional
        Cut height for ``cut="height"``.
    min_size : int, optional
        Minimum cluster size for ``cut="dynamic"``.
    """

    def __init__(
        self,
        linkage: str = "minimax",
        cut: str = "top_k",
        k: int = DEFAULT_TOP_K,
        height: float | None = None,
        min_size: int | None = None,
    ):
        self.linkage = linkage
        self.cut = cut
        self.k = k
        self.height = height
        self.min_size = min_size

    def fit(self, X, y=None, labels=None):
        """Fit from a dissimilarity input (square, condensed, or object)."""
        if self.linkage not in LINKAGES:
            raise ValidationError(
                f"linkage must be one of {LINKAGES}, got {self.linkage!r}"
            )
        dm = as_dissimilarity(X, labels)
        self.dendrogram_ = agglomerate(dm, linkage=self.linkage)
        self.n_leaves_ = dm.n
        self.clustering_ = self._flat_cut()
        self.labels_ = self.clustering_.assignment
        return self

    def _flat_cut(self):
        dend = self.dendrogram_
        if self.cut == "top_k":
            return cut_top_k(dend, min(int(self.k), dend.n))
        if self.cut == "height":
            if self.height is None:
                raise ValidationError('cut="height" requires the height parameter')
            return cut_at_height(dend, self.height)
        if self.cut == "dynamic":
            if self.min_size is None:
                raise ValidationError('cut="dynamic" requires the min_size parameter')
            return dynamic_cut(dend, self.min_size)
        raise ValidationError(f"unknown cut {self.cut!r}")

    def fit_predict(self, X, y=None, **kwargs):
        return self.fit(X, y, **kwargs).labels_

    @property
    def prototypes_(self) -> tuple[int, ...]:
        check_is_fitted(self, "clustering_")
        return self.clustering_.prototypes
