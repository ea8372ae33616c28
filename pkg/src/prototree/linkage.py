"""Set-level linkage primitives over a dissimilarity matrix.

Complete linkage scores a pair of clusters by the farthest cross pair.
Minimax linkage scores it by the radius of the smallest ball that covers
the union and is centered at one of its members; that center is the
merged cluster's prototype.  Prototype ties break to the smallest leaf
id so results are reproducible.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .dissimilarity import DissimilarityMatrix


def _as_index_array(c: Iterable[int], n: int, name: str) -> np.ndarray:
    arr = np.asarray(sorted(set(int(x) for x in c)), dtype=np.intp)
    if arr.size == 0:
        raise ValueError("empty cluster")
    if arr[0] < 0 or arr[-1] >= n:
        raise ValueError(f"{name} contains leaf ids outside [0, {n})")
    return arr


def d_max(x: int, cluster: Iterable[int], dm: DissimilarityMatrix) -> float:
    """Largest dissimilarity from observation ``x`` to any member of ``cluster``.

    ``x`` does not have to belong to the cluster.
    """
    members = _as_index_array(cluster, dm.n, "cluster")
    x = int(x)
    if not 0 <= x < dm.n:
        raise ValueError(f"leaf id {x} outside [0, {dm.n})")
    return max(dm.lookup(x, int(y)) for y in members)


def minimax_radius_and_prototype(
    cluster: Iterable[int], dm: DissimilarityMatrix
) -> tuple[float, int]:
    """Radius of the smallest member-centered covering ball, and its center.

    Returns ``(radius, prototype)`` where the prototype is always a member
    of the cluster; ties go to the smallest leaf id.
    """
    members = _as_index_array(cluster, dm.n, "cluster")
    square = dm.to_square()
    sub = square[np.ix_(members, members)]
    reach = sub.max(axis=1)
    best = int(np.argmin(reach))  # first occurrence = smallest id (members sorted)
    return float(reach[best]), int(members[best])


def minimax_linkage(
    g: Iterable[int], h: Iterable[int], dm: DissimilarityMatrix
) -> tuple[float, int]:
    """Minimax linkage between two disjoint clusters.

    Equals the minimax radius of the union; the returned prototype is the
    representative the merged cluster would carry.
    """
    ga = _as_index_array(g, dm.n, "G")
    ha = _as_index_array(h, dm.n, "H")
    if np.intersect1d(ga, ha).size:
        raise ValueError("clusters not disjoint")
    return minimax_radius_and_prototype(np.concatenate([ga, ha]), dm)


def complete_linkage(g: Iterable[int], h: Iterable[int], dm: DissimilarityMatrix) -> float:
    """Farthest between-cluster pair of observations."""
    ga = _as_index_array(g, dm.n, "G")
    ha = _as_index_array(h, dm.n, "H")
    if np.intersect1d(ga, ha).size:
        raise ValueError("clusters not disjoint")
    square = dm.to_square()
    return float(square[np.ix_(ga, ha)].max())
