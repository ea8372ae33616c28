import numpy as np
import pytest

from prototree import DissimilarityMatrix, agglomerate

from oracle import line_square, random_square


def dm_from_square(square, labels=None) -> DissimilarityMatrix:
    n = square.shape[0]
    if labels is None:
        labels = tuple(f"L{i}" for i in range(n))
    return DissimilarityMatrix.from_square(np.asarray(square, float), labels)


@pytest.fixture
def dm3() -> DissimilarityMatrix:
    """Line points at 0, 1, 3."""
    return dm_from_square(line_square([0, 1, 3]), ("a", "b", "c"))


@pytest.fixture
def tree3(dm3):
    return agglomerate(dm3)


@pytest.fixture
def dm4() -> DissimilarityMatrix:
    """Line points at 0, 1, 10, 11; two tight pairs far apart."""
    return dm_from_square(line_square([0, 1, 10, 11]), ("a", "b", "c", "d"))


@pytest.fixture
def tree4(dm4):
    """Merges {0,1}@1, {2,3}@1, root@10; prototypes [0, 2, 1]."""
    return agglomerate(dm4)


@pytest.fixture
def random_dm():
    """Factory: seeded random dissimilarity of a given size."""

    def make(n: int, seed: int = 0) -> DissimilarityMatrix:
        rng = np.random.default_rng(seed)
        return dm_from_square(random_square(rng, n))

    return make


@pytest.fixture
def random_tree(random_dm):
    def make(n: int, seed: int = 0, linkage: str = "minimax"):
        return agglomerate(random_dm(n, seed), linkage=linkage)

    return make
