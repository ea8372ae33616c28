"""Greedy agglomeration with minimax or complete linkage.

The engine keeps, for every active cluster ``C``, the vector
``dmax[C][x] = max_{y in C} d(x, y)`` over all leaves ``x``.  Merging two
clusters updates that vector with an elementwise max, and the minimax
score of any candidate pair is a min over member entries of the two
cached vectors, so no linkage value is ever recomputed from raw pairs.
Tests verify the scheme against a from-scratch oracle.

Ties are deterministic: merge pairs break lexicographically on their
creation indices (leaves count as created first), prototypes break to
the smallest leaf id.
"""

from __future__ import annotations

import os

import numpy as np

from .dissimilarity import DissimilarityMatrix
from .dendrogram import Dendrogram

LINKAGES = ("minimax", "complete")

_USE_NUMBA = os.environ.get("PROTOTREE_NO_NUMBA", "") == ""
if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _USE_NUMBA = False

if _USE_NUMBA:

    @njit(cache=True)
    def _best_pair_nb(link, active_slots, creation):
        best_v = np.inf
        bc1 = np.int64(-1)
        bc2 = np.int64(-1)
        bs_a = -1
        bs_b = -1
        m = active_slots.shape[0]
        for i in range(m):
            s = active_slots[i]
            for j in range(i + 1, m):
                t = active_slots[j]
                v = link[s, t]
                if v > best_v:
                    continue
                c1 = creation[s]
                c2 = creation[t]
                if c1 > c2:
                    c1, c2 = c2, c1
                if v < best_v or c1 < bc1 or (c1 == bc1 and c2 < bc2):
                    best_v = v
                    bc1 = c1
                    bc2 = c2
                    bs_a = s
                    bs_b = t
        return bs_a, bs_b

    @njit(cache=True)
    def _minimax_row_nb(dmax, members, counts, a, active_slots, out):
        # out[i] = minimax linkage between slot a and active_slots[i]:
        # the candidate center ranges over members of both clusters.
        ca = counts[a]
        for i in range(active_slots.shape[0]):
            t = active_slots[i]
            best = np.inf
            for k in range(ca):
                x = members[a, k]
                v = dmax[a, x]
                w = dmax[t, x]
                if w > v:
                    v = w
                if v < best:
                    best = v
            for k in range(counts[t]):
                y = members[t, k]
                v = dmax[a, y]
                w = dmax[t, y]
                if w > v:
                    v = w
                if v < best:
                    best = v
            out[i] = best

    @njit(cache=True)
    def _prototype_nb(dmax_row, members, counts, a):
        best = np.inf
        best_leaf = np.int32(2147483647)
        for k in range(counts[a]):
            x = members[a, k]
            v = dmax_row[x]
            if v < best or (v == best and x < best_leaf):
                best = v
                best_leaf = x
        return best, best_leaf


def _best_pair_np(link, active_slots, creation):
    sub = link[np.ix_(active_slots, active_slots)]
    iu = np.triu_indices(active_slots.size, k=1)
    vals = sub[iu]
    m = vals.min()
    best_key = None
    best = None
    for flat in np.flatnonzero(vals == m):
        s = active_slots[iu[0][flat]]
        t = active_slots[iu[1][flat]]
        c1, c2 = sorted((int(creation[s]), int(creation[t])))
        if best_key is None or (c1, c2) < best_key:
            best_key = (c1, c2)
            best = (int(s), int(t))
    return best


def _minimax_row_np(dmax, members, counts, a, active_slots, out):
    ma = members[a, : counts[a]]
    for i, t in enumerate(active_slots):
        mt = members[t, : counts[t]]
        term1 = np.maximum(dmax[a, ma], dmax[t, ma]).min()
        term2 = np.maximum(dmax[a, mt], dmax[t, mt]).min()
        out[i] = min(term1, term2)


def _prototype_np(dmax_row, members, counts, a):
    ma = members[a, : counts[a]]
    vals = dmax_row[ma]
    best = vals.min()
    return float(best), int(ma[vals == best].min())


def agglomerate(dm: DissimilarityMatrix, linkage: str = "minimax") -> Dendrogram:
    """Cluster all observations bottom-up into a prototyped dendrogram.

    Both linkages record the pair's linkage value as the merge height.
    Complete-linkage trees still get minimax prototypes for every merge so
    the viewer can label branches uniformly.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}, expected one of {LINKAGES}")
    n = dm.n
    square = dm.to_square()

    dmax = square                             # row s = d_max(., cluster in slot s)
    link = square.copy()                      # pairwise linkage between active slots
    np.fill_diagonal(link, np.inf)
    members = np.empty((n, n), dtype=np.int32)
    members[:, 0] = np.arange(n, dtype=np.int32)
    counts = np.ones(n, dtype=np.int64)
    creation = np.arange(n, dtype=np.int64)   # node id of the cluster in each slot
    active = np.ones(n, dtype=bool)

    merges = np.empty((n - 1, 2), dtype=np.int64)
    heights = np.empty(n - 1, dtype=np.float64)
    prototypes = np.empty(n - 1, dtype=np.int64)

    use_nb = _USE_NUMBA
    row_buf = np.empty(n, dtype=np.float64)

    for k in range(n - 1):
        active_slots = np.flatnonzero(active)
        if use_nb:
            sa, sb = _best_pair_nb(link, active_slots, creation)
        else:
            sa, sb = _best_pair_np(link, active_slots, creation)
        value = float(link[sa, sb])
        ia, ib = int(creation[sa]), int(creation[sb])
        merges[k, 0], merges[k, 1] = min(ia, ib), max(ia, ib)
        heights[k] = value

        # Fold slot sb into slot sa: members, d_max cache, creation index.
        ca, cb = int(counts[sa]), int(counts[sb])
        members[sa, ca : ca + cb] = members[sb, :cb]
        counts[sa] = ca + cb
        if linkage == "complete":
            # Lance-Williams style row update; capture before deactivating sb.
            others = active_slots[(active_slots != sa) & (active_slots != sb)]
            new_row = np.maximum(link[sa, others], link[sb, others])
        np.maximum(dmax[sa], dmax[sb], out=dmax[sa])
        creation[sa] = n + k
        active[sb] = False
        link[sb, :] = np.inf
        link[:, sb] = np.inf

        if use_nb:
            _, proto = _prototype_nb(dmax[sa], members, counts, sa)
            prototypes[k] = int(proto)
        else:
            _, proto = _prototype_np(dmax[sa], members, counts, sa)
            prototypes[k] = proto

        others = np.flatnonzero(active)
        others = others[others != sa]
        if others.size:
            if linkage == "minimax":
                out = row_buf[: others.size]
                if use_nb:
                    _minimax_row_nb(dmax, members, counts, sa, others, out)
                else:
                    _minimax_row_np(dmax, members, counts, sa, others, out)
                link[sa, others] = out
                link[others, sa] = out
            else:
                link[sa, others] = new_row
                link[others, sa] = new_row

    order = _leaf_order(n, merges)
    return Dendrogram(
        n=n,
        merges=merges,
        heights=heights,
        prototypes=prototypes,
        order=order,
        leaf_labels=dm.labels,
        linkage_name=linkage,
    )


def _leaf_order(n: int, merges: np.ndarray) -> np.ndarray:
    """Crossing-free drawing order: left-to-right depth-first traversal."""
    order = np.empty(n, dtype=np.int64)
    pos = 0
    stack = [2 * n - 2]
    while stack:
        node = stack.pop()
        if node < n:
            order[pos] = node
            pos += 1
        else:
            left, right = merges[node - n]
            stack.append(int(right))
            stack.append(int(left))
    return order
