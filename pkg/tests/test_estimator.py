import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from prototree import (
    PairwiseDissimilarity,
    PrototypeAgglomerative,
    ValidationError,
    agglomerate,
    as_dissimilarity,
    correlation_dissimilarity,
    cut_top_k,
    euclidean_dissimilarity,
)
from prototree.estimator import as_feature_matrix

from oracle import line_square, random_square


class TestAsDissimilarity:
    def test_square_input(self):
        dm = as_dissimilarity(line_square([0, 1, 3]))
        assert dm.n == 3
        assert dm.values.tolist() == [1.0, 3.0, 2.0]
        assert dm.labels == ("0", "1", "2")

    def test_condensed_input(self):
        dm = as_dissimilarity(np.array([1.0, 3.0, 2.0]), labels=("a", "b", "c"))
        assert dm.n == 3
        assert dm.lookup(0, 2) == 3.0

    def test_passthrough(self, dm4):
        assert as_dissimilarity(dm4) is dm4

    def test_passthrough_rejects_extra_labels(self, dm4):
        with pytest.raises(ValidationError, match="conflicts"):
            as_dissimilarity(dm4, labels=("w", "x", "y", "z"))

    def test_bad_condensed_length(self):
        with pytest.raises(ValidationError, match="not a condensed matrix"):
            as_dissimilarity(np.array([1.0, 2.0]))

    def test_non_square(self):
        with pytest.raises(ValidationError, match="not square"):
            as_dissimilarity(np.zeros((2, 3)))

    def test_bad_rank(self):
        with pytest.raises(ValidationError, match="shape"):
            as_dissimilarity(np.zeros((2, 2, 2)))


class TestPrototypeAgglomerative:
    def test_fit_exposes_tree_and_labels(self, dm4):
        est = PrototypeAgglomerative().fit(dm4)
        assert est.n_leaves_ == 4
        assert est.dendrogram_.digest == agglomerate(dm4).digest
        # k=10 clamps to n=4: every leaf its own cluster
        assert est.labels_.tolist() == [0, 1, 2, 3]

    def test_input_forms_agree(self, dm4):
        square = dm4.to_square()
        by_square = PrototypeAgglomerative().fit(square)
        by_condensed = PrototypeAgglomerative().fit(
            dm4.values, labels=("0", "1", "2", "3")
        )
        assert by_square.dendrogram_.merges.tolist() == (
            by_condensed.dendrogram_.merges.tolist()
        )

    def test_top_k_cut(self, dm4):
        est = PrototypeAgglomerative(k=2).fit(dm4)
        assert est.labels_.tolist() == cut_top_k(
            est.dendrogram_, 2
        ).assignment.tolist()
        assert est.clustering_.n_clusters == 2

    def test_height_cut(self, dm4):
        est = PrototypeAgglomerative(cut="height", height=5.0).fit(dm4)
        assert est.labels_.tolist() == [0, 0, 1, 1]
        assert est.prototypes_ == (0, 2)

    def test_height_cut_requires_height(self, dm4):
        with pytest.raises(ValidationError, match="height"):
            PrototypeAgglomerative(cut="height").fit(dm4)

    def test_dynamic_cut_requires_min_size(self, dm4):
        with pytest.raises(ValidationError, match="min_size"):
            PrototypeAgglomerative(cut="dynamic").fit(dm4)

    def test_unknown_linkage(self, dm4):
        with pytest.raises(ValidationError, match="linkage"):
            PrototypeAgglomerative(linkage="ward").fit(dm4)

    def test_fit_predict(self, dm4):
        labels = PrototypeAgglomerative(k=2).fit_predict(dm4)
        assert labels.tolist() == [0, 0, 1, 1]

    def test_get_params_and_clone(self):
        est = PrototypeAgglomerative(linkage="complete", cut="height", height=2.5)
        params = est.get_params()
        assert params["linkage"] == "complete"
        assert params["height"] == 2.5
        cloned = clone(est)
        assert cloned.get_params() == params

    def test_unfitted_prototypes_raise(self):
        with pytest.raises(NotFittedError):
            PrototypeAgglomerative().prototypes_


class TestPairwiseDissimilarity:
    def test_euclidean_transform(self):
        X = np.array([[0.0, 0.0], [3.0, 4.0]])
        out = PairwiseDissimilarity(metric="euclidean").fit(X).transform(X)
        assert out.shape == (2, 2)
        assert out[0, 1] == 5.0

    def test_correlation_matches_direct(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(8, 6))
        est = PairwiseDissimilarity(metric="correlation").fit(X)
        direct = correlation_dissimilarity(as_feature_matrix(X)).to_square()
        assert np.array_equal(est.transform(X), direct)

    def test_scale_path(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(6, 5)) * np.array([1, 10, 100, 1000, 1e4])
        scaled = PairwiseDissimilarity(metric="euclidean", scale=True)
        plain = PairwiseDissimilarity(metric="euclidean", scale=False)
        a = scaled.fit(X).transform(X)
        b = plain.fit(X).transform(X)
        assert not np.allclose(a, b)

    def test_unknown_metric(self):
        with pytest.raises(ValidationError, match="metric"):
            PairwiseDissimilarity(metric="cosine").fit(np.zeros((3, 2)))

    def test_transform_before_fit(self):
        with pytest.raises(NotFittedError):
            PairwiseDissimilarity().transform(np.zeros((3, 2)))

    def test_pipeline_composition(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(12, 4))
        pipe = Pipeline(
            [
                ("dist", PairwiseDissimilarity(metric="euclidean")),
                ("cluster", PrototypeAgglomerative(k=3)),
            ]
        )
        labels = pipe.fit_predict(X)
        direct = PrototypeAgglomerative(k=3).fit(
            euclidean_dissimilarity(as_feature_matrix(X))
        )
        assert labels.tolist() == direct.labels_.tolist()
