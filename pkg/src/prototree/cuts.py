"""Turning a dendrogram into a flat clustering.

All three cut styles return clusters that are dendrogram nodes, so every
cluster inherits that node's prototype.  Cluster indices are numbered by
first appearance in the dendrogram's drawing order, which keeps exports
stable across runs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .dendrogram import Dendrogram


@dataclass(eq=False)
class Clustering:
    """A partition of the leaves into dendrogram nodes.

    ``assignment[leaf]`` is the cluster index; ``nodes[c]`` the dendrogram
    node backing cluster ``c``; ``prototypes[c]`` that node's prototype.
    """

    assignment: np.ndarray = field(repr=False)
    nodes: tuple[int, ...]
    prototypes: tuple[int, ...]
    method: str

    @property
    def n_clusters(self) -> int:
        return len(self.nodes)


def _clustering_from_nodes(dend: Dendrogram, nodes, method: str) -> Clustering:
    """Package a set of covering nodes, numbering them in leaf order."""
    node_of_leaf = np.empty(dend.n, dtype=np.int64)
    for node in nodes:
        node_of_leaf[dend.subtree_leaves(node)] = node
    ordered: list[int] = []
    index_of: dict[int, int] = {}
    for leaf in dend.order:
        node = int(node_of_leaf[leaf])
        if node not in index_of:
            index_of[node] = len(ordered)
            ordered.append(node)
    assignment = np.array([index_of[int(node_of_leaf[leaf])] for leaf in range(dend.n)])
    return Clustering(
        assignment=assignment,
        nodes=tuple(ordered),
        prototypes=tuple(dend.prototype(node) for node in ordered),
        method=method,
    )


def cut_at_height(dend: Dendrogram, h: float) -> Clustering:
    """Clusters are the maximal nodes with height <= h (leaves count as 0).

    A merge at exactly ``h`` survives the cut.  The top-down walk keeps
    this well defined even if the tree has height inversions.
    """
    h = float(h)
    if h < 0:
        raise ValueError(f"cut height must be non-negative, got {h}")
    nodes = []
    stack = [dend.root]
    while stack:
        node = stack.pop()
        if dend.height(node) <= h:
            nodes.append(node)
        else:
            stack.extend(dend.children(node))
    return _clustering_from_nodes(dend, nodes, method=f"height={h!r}")


def cut_top_k(dend: Dendrogram, k: int) -> Clustering:
    """Undo the k-1 highest merges, leaving k branches.

    Ties between equal heights are resolved by undoing the later merge
    first.  Implemented as a greedy top-down split so the result stays a
    partition even when heights invert.
    """
    k = int(k)
    if not 1 <= k <= dend.n:
        raise ValueError(f"k must be in [1, {dend.n}], got {k}")
    roots = {dend.root}
    for _ in range(k - 1):
        node = max(
            (v for v in roots if not dend.is_leaf(v)),
            key=lambda v: (dend.height(v), v),
        )
        roots.remove(node)
        roots.update(dend.children(node))
    return _clustering_from_nodes(dend, roots, method=f"top_k={k}")


DEFAULT_TOP_K = 10

SPLIT_HEIGHT_FRACTION = 0.9
DYNAMIC_CUT_MAX_ROUNDS = 100


def dynamic_cut(dend: Dendrogram, min_size: int, h0: float | None = None) -> Clustering:
    """Adaptive cut: split clusters with clear sub-structure, absorb small ones.

    Procedure: cut at ``h0`` (default: mean merge height), then repeat up
    to ``DYNAMIC_CUT_MAX_ROUNDS`` rounds of
    (a) splitting any cluster whose children are both interior nodes of
    size >= ``min_size`` merging at most ``SPLIT_HEIGHT_FRACTION`` of the
    cluster's own height, then
    (b) dissolving clusters smaller than ``min_size`` into their sibling
    subtree (replacing the pair by the parent's leaf set) until none
    remain, smallest node id first.  The root never dissolves.
    """
    min_size = int(min_size)
    if min_size < 1:
        raise ValueError(f"min_size must be >= 1, got {min_size}")
    if h0 is None:
        h0 = float(dend.heights.mean())

    clusters = set(cut_at_height(dend, h0).nodes)
    for _ in range(DYNAMIC_CUT_MAX_ROUNDS):
        changed = False

        # Split pass over a snapshot; freshly created children wait a round.
        for node in sorted(clusters):
            if dend.is_leaf(node) or node not in clusters:
                continue
            left, right = dend.children(node)
            if dend.is_leaf(left) or dend.is_leaf(right):
                continue
            if dend.size(left) < min_size or dend.size(right) < min_size:
                continue
            gap_ok = max(dend.height(left), dend.height(right)) <= (
                SPLIT_HEIGHT_FRACTION * dend.height(node)
            )
            if not gap_ok:
                continue
            clusters.remove(node)
            clusters.update((left, right))
            changed = True

        # Merge-to-fixed-point: every undersized cluster climbs into its
        # parent, absorbing whatever currently covers the sibling subtree.
        while True:
            small = sorted(
                v for v in clusters if dend.size(v) < min_size and v != dend.root
            )
            if not small:
                break
            node = small[0]
            parent = dend.parent(node)
            absorbed = {
                v
                for v in clusters
                if v == node or _is_descendant_or_self(dend, v, parent)
            }
            clusters -= absorbed
            clusters.add(parent)
            changed = True

        if not changed:
            break

    return _clustering_from_nodes(
        dend, clusters, method=f"dynamic(min_size={min_size},h0={h0!r})"
    )


def _is_descendant_or_self(dend: Dendrogram, node: int, ancestor: int) -> bool:
    cur = node
    while cur != -1:
        if cur == ancestor:
            return True
        cur = dend.parent(cur)
    return False


def clustering_to_csv(dend: Dendrogram, clustering: Clustering) -> str:
    """Cluster table as CSV text: header ``leaf_label,cluster,prototype``.

    One row per leaf, ordered by the dendrogram's drawing order; the
    prototype column holds the cluster prototype's leaf label.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["leaf_label", "cluster", "prototype"])
    for leaf in dend.order:
        c = int(clustering.assignment[leaf])
        writer.writerow(
            [
                dend.leaf_labels[leaf],
                c,
                dend.leaf_labels[clustering.prototypes[c]],
            ]
        )
    return out.getvalue()
