"""The immutable prototyped dendrogram and its on-disk form.

Node ids follow the usual convention: leaves are ``0..n-1`` and the
interior node created by merge ``k`` (0-based) has id ``n + k``.  The
root is ``2n - 2``.  Every interior node carries a prototype, which is a
leaf id from its own subtree.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DigestMismatchError, ValidationError

TREE_FORMAT_VERSION = 1


@dataclass(eq=False)
class Dendrogram:
    """Result of an agglomerative clustering, plus one prototype per merge.

    Treat instances as immutable: every derived structure (parents, sizes,
    subtree leaves) is cached on first use and shared by all readers.
    """

    n: int
    merges: np.ndarray = field(repr=False)      # (n-1, 2) child ids, smaller first
    heights: np.ndarray = field(repr=False)     # (n-1,) merge heights
    prototypes: np.ndarray = field(repr=False)  # (n-1,) leaf ids
    order: np.ndarray = field(repr=False)       # (n,) leaf permutation for drawing
    leaf_labels: tuple[str, ...] = field(repr=False)
    linkage_name: str = "minimax"

    def __post_init__(self):
        self.merges = np.ascontiguousarray(self.merges, dtype=np.int64)
        self.heights = np.ascontiguousarray(self.heights, dtype=np.float64)
        self.prototypes = np.ascontiguousarray(self.prototypes, dtype=np.int64)
        self.order = np.ascontiguousarray(self.order, dtype=np.int64)
        self.leaf_labels = tuple(self.leaf_labels)

    # -- node helpers -------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return 2 * self.n - 1

    @property
    def root(self) -> int:
        return 2 * self.n - 2

    def is_leaf(self, node: int) -> bool:
        return node < self.n

    def children(self, node: int) -> tuple[int, int]:
        if node < self.n:
            raise ValueError(f"node {node} is a leaf")
        left, right = self.merges[node - self.n]
        return int(left), int(right)

    def height(self, node: int) -> float:
        return 0.0 if node < self.n else float(self.heights[node - self.n])

    def prototype(self, node: int) -> int:
        """Representative leaf: the node itself for leaves."""
        return int(node) if node < self.n else int(self.prototypes[node - self.n])

    def label_of(self, node: int) -> str:
        """Display label: the prototype's leaf label."""
        return self.leaf_labels[self.prototype(node)]

    @cached_property
    def parents(self) -> np.ndarray:
        """Parent id per node; the root maps to -1."""
        parents = np.full(self.n_nodes, -1, dtype=np.int64)
        for k in range(self.n - 1):
            parents[self.merges[k, 0]] = self.n + k
            parents[self.merges[k, 1]] = self.n + k
        return parents

    def parent(self, node: int) -> int:
        return int(self.parents[node])

    @cached_property
    def sizes(self) -> np.ndarray:
        """Leaf count of every node's subtree."""
        sizes = np.ones(self.n_nodes, dtype=np.int64)
        for k in range(self.n - 1):
            sizes[self.n + k] = sizes[self.merges[k, 0]] + sizes[self.merges[k, 1]]
        return sizes

    def size(self, node: int) -> int:
        return int(self.sizes[node])

    @cached_property
    def depths(self) -> np.ndarray:
        """Edge distance from the root per node."""
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for k in range(self.n - 2, -1, -1):
            node = self.n + k
            depths[self.merges[k, 0]] = depths[node] + 1
            depths[self.merges[k, 1]] = depths[node] + 1
        return depths

    def subtree_leaves(self, node: int) -> np.ndarray:
        """Sorted leaf ids under ``node`` (iterative, safe for deep chains)."""
        if node < self.n:
            return np.array([node], dtype=np.int64)
        out = []
        stack = [node]
        while stack:
            u = stack.pop()
            if u < self.n:
                out.append(u)
            else:
                stack.extend(self.merges[u - self.n])
        return np.sort(np.asarray(out, dtype=np.int64))

    def ancestors(self, node: int) -> list[int]:
        """Strict ancestors, root first."""
        chain = []
        p = self.parent(node)
        while p != -1:
            chain.append(p)
            p = self.parent(p)
        chain.reverse()
        return chain

    def has_inversions(self) -> bool:
        """True if some merge sits below one of its children (possible for
        linkages without the reducibility property)."""
        for k in range(self.n - 1):
            for child in self.merges[k]:
                if child >= self.n and self.heights[child - self.n] > self.heights[k]:
                    return True
        return False

    # -- structural validation ---------------------------------------------

    def validate(self) -> None:
        """Check the node-id convention and prototype membership."""
        n = self.n
        if n < 2:
            raise ValidationError(f"dendrogram needs n >= 2, got {n}")
        if self.merges.shape != (n - 1, 2):
            raise ValidationError(f"merges shape {self.merges.shape}, expected {(n - 1, 2)}")
        if self.heights.shape != (n - 1,) or self.prototypes.shape != (n - 1,):
            raise ValidationError("heights/prototypes length must be n-1")
        if not np.isfinite(self.heights).all() or (self.heights < 0).any():
            k = int(np.flatnonzero(~np.isfinite(self.heights) | (self.heights < 0))[0])
            raise ValidationError(f"merge {k} has invalid height {self.heights[k]}")
        seen = np.zeros(self.n_nodes, dtype=bool)
        for k in range(n - 1):
            for child in self.merges[k]:
                child = int(child)
                if not 0 <= child < n + k:
                    raise ValidationError(
                        f"merge {k} references id {child}, allowed range [0, {n + k})"
                    )
                if seen[child]:
                    raise ValidationError(f"node {child} appears as a child twice")
                seen[child] = True
        if seen[self.root]:
            raise ValidationError("root appears as a child")
        missing = np.flatnonzero(~seen[: self.root])
        if missing.size:
            raise ValidationError(f"node {int(missing[0])} never appears as a child")
        if sorted(self.order.tolist()) != list(range(n)):
            raise ValidationError("order is not a permutation of the leaves")
        if len(self.leaf_labels) != n:
            raise ValidationError(f"expected {n} leaf labels, got {len(self.leaf_labels)}")
        for k in range(n - 1):
            proto = int(self.prototypes[k])
            leaves = self.subtree_leaves(n + k)
            if proto not in leaves:
                raise ValidationError(
                    f"prototype leaf {proto} is not in the subtree of node {n + k}"
                )

    # -- canonical serialization and digest ---------------------------------

    def canonical_payload(self) -> dict:
        """The digestable content of the tree file, digest excluded."""
        return {
            "format_version": TREE_FORMAT_VERSION,
            "n": self.n,
            "labels": list(self.leaf_labels),
            "merges": [
                {"left": int(l), "right": int(r), "height": float(h)}
                for (l, r), h in zip(self.merges, self.heights)
            ],
            "prototypes": [int(p) for p in self.prototypes],
            "order": [int(i) for i in self.order],
            "linkage": self.linkage_name,
        }

    @cached_property
    def digest(self) -> str:
        """Hex SHA-256 of the canonical serialization; identifies this tree."""
        blob = json.dumps(
            self.canonical_payload(), separators=(",", ":"), ensure_ascii=False
        ).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def attach_prototypes(dend: Dendrogram, protos) -> Dendrogram:
    """Replace the computed prototypes with a user-supplied vector.

    Each entry must be a leaf inside the corresponding node's subtree;
    the first violation is reported with its node and leaf ids.
    """
    protos = np.asarray(protos, dtype=np.int64)
    if protos.shape != (dend.n - 1,):
        raise ValidationError(
            f"expected {dend.n - 1} prototypes, got shape {protos.shape}"
        )
    # Membership via upward walk: leaf -> ... -> node must pass through node.
    for k in range(dend.n - 1):
        leaf = int(protos[k])
        node = dend.n + k
        if not 0 <= leaf < dend.n:
            raise ValidationError(f"prototype {leaf} for node {node} is not a leaf id")
        cur = leaf
        while cur != -1 and cur != node:
            cur = dend.parent(cur)
        if cur != node:
            raise ValidationError(
                f"prototype leaf {leaf} is not in the subtree of node {node}"
            )
    return Dendrogram(
        n=dend.n,
        merges=dend.merges.copy(),
        heights=dend.heights.copy(),
        prototypes=protos.copy(),
        order=dend.order.copy(),
        leaf_labels=dend.leaf_labels,
        linkage_name=dend.linkage_name,
    )


# ---------------------------------------------------------------------------
# Tree file IO (canonical JSON, digest-stamped)
# ---------------------------------------------------------------------------

def save_tree(dend: Dendrogram, path) -> None:
    """Write the canonical JSON tree file with its digest stamped in."""
    payload = dend.canonical_payload()
    payload["digest"] = dend.digest
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"), ensure_ascii=False)
        fh.write("\n")


def load_tree(path) -> Dendrogram:
    """Load and validate a tree file; the embedded digest must match."""
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: tree file must be a JSON object")
    version = payload.get("format_version")
    if version != TREE_FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported format_version {version!r} "
            f"(expected {TREE_FORMAT_VERSION})"
        )
    required = {"n", "labels", "merges", "prototypes", "order", "linkage", "digest"}
    missing = required - payload.keys()
    if missing:
        raise ValidationError(f"{path}: missing fields {sorted(missing)}")
    merges = payload["merges"]
    dend = Dendrogram(
        n=int(payload["n"]),
        merges=np.array([[m["left"], m["right"]] for m in merges], dtype=np.int64).reshape(-1, 2),
        heights=np.array([m["height"] for m in merges], dtype=np.float64),
        prototypes=np.asarray(payload["prototypes"], dtype=np.int64),
        order=np.asarray(payload["order"], dtype=np.int64),
        leaf_labels=tuple(payload["labels"]),
        linkage_name=str(payload["linkage"]),
    )
    dend.validate()
    if dend.digest != payload["digest"]:
        raise DigestMismatchError(
            f"{path}: stored digest {payload['digest'][:12]}... does not match "
            f"recomputed {dend.digest[:12]}..."
        )
    return dend


def to_hclust_table(dend: Dendrogram) -> list[dict]:
    """Rows of the merge table in the R ``hclust`` id convention.

    Leaves are negative 1-based ids, interior nodes positive 1-based merge
    indices; every row also names the merged cluster's prototype leaf.
    Documented in docs/formats.md.
    """
    rows = []
    for k in range(dend.n - 1):
        encoded = []
        for child in dend.merges[k]:
            child = int(child)
            encoded.append(-(child + 1) if child < dend.n else child - dend.n + 1)
        rows.append(
            {
                "left": encoded[0],
                "right": encoded[1],
                "height": float(dend.heights[k]),
                "prototype": dend.leaf_labels[int(dend.prototypes[k])],
            }
        )
    return rows


def save_hclust_csv(dend: Dendrogram, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["left", "right", "height", "prototype"])
        for row in to_hclust_table(dend):
            writer.writerow([row["left"], row["right"], repr(row["height"]), row["prototype"]])
