"""Expand/collapse view state and the visible-tree projection.

The dendrogram itself is immutable; a view is just the set of expanded
interior nodes plus the id of the active label set.  Everything here is
pure: expand/collapse return new ViewState values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .cuts import Clustering, _clustering_from_nodes
from .dendrogram import Dendrogram
from .errors import ValidationError
from .labels import LabelSet


@dataclass(frozen=True)
class ViewState:
    """Which interior nodes are expanded, and which label set is active."""

    expanded: frozenset[int] = frozenset()
    active_label_set: str = "default"

    def __post_init__(self):
        object.__setattr__(self, "expanded", frozenset(self.expanded))


def check_view(dend: Dendrogram, view: ViewState) -> None:
    """Validate interior-only membership and ancestor closure.

    Closure means: if a node is expanded, so is its parent.  Checking the
    single parent link for every member is equivalent to checking the whole
    ancestor chain.
    """
    parents = dend.parents
    for v in view.expanded:
        if v < dend.n or v >= dend.n_nodes:
            raise ValidationError(f"expanded set contains non-interior node {v}")
        parent = parents[v]
        if parent >= 0 and parent not in view.expanded:
            raise ValidationError(
                f"view violates closure: node {v} is expanded but its "
                f"ancestors are not expanded"
            )


def expand(dend: Dendrogram, view: ViewState, node: int) -> ViewState:
    """Expand a visible interior node."""
    if dend.is_leaf(node):
        raise ValidationError(f"cannot expand leaf {node}")
    if node >= dend.n_nodes:
        raise ValidationError(f"unknown node {node}")
    parent = dend.parents[node]
    while parent >= 0:
        if parent not in view.expanded:
            raise ValidationError(
                f"cannot expand node {node}: ancestors not expanded"
            )
        parent = dend.parents[parent]
    return replace(view, expanded=view.expanded | {node})


def collapse(dend: Dendrogram, view: ViewState, node: int) -> ViewState:
    """Collapse a node, purging any expanded descendants to keep closure."""
    if dend.is_leaf(node):
        raise ValidationError(f"cannot collapse leaf {node}")
    if node >= dend.n_nodes:
        raise ValidationError(f"unknown node {node}")
    parents = dend.parents

    def under(v: int) -> bool:
        while v >= 0:
            if v == node:
                return True
            v = parents[v]
        return False

    return replace(view, expanded=frozenset(v for v in view.expanded if not under(v)))


@dataclass(eq=False)
class RenderNode:
    """One visible node, labelled by its prototype."""

    id: int
    height: float
    size: int
    prototype: int
    label: str
    show_label: bool
    collapsed: bool
    has_children: bool
    children: list["RenderNode"] = field(default_factory=list)
    tooltip: str | None = None


def _render_node(
    dend: Dendrogram,
    node: int,
    parent_prototype: int | None,
    view: ViewState,
    labels: LabelSet | None,
) -> RenderNode:
    proto = dend.prototype(node)
    leaf_label = dend.leaf_labels[proto]
    if labels is None:
        display, tooltip = leaf_label, None
    else:
        display = labels.display_for(leaf_label)
        tooltip = labels.tooltip_for(leaf_label)
    interior = not dend.is_leaf(node)
    return RenderNode(
        id=node,
        height=dend.height(node),
        size=int(dend.sizes[node]),
        prototype=proto,
        label=display,
        # root always shows; below the root only prototype changes are labelled
        show_label=parent_prototype is None or proto != parent_prototype,
        collapsed=interior and node not in view.expanded,
        has_children=interior,
        tooltip=tooltip,
    )


def visible_tree(
    dend: Dendrogram, view: ViewState, labels: LabelSet | None = None
) -> RenderNode:
    """Project the dendrogram onto the nodes made visible by the view.

    A node is visible when all of its strict ancestors are expanded.
    Children are attached only under expanded nodes; a visible interior
    node that is not expanded appears as a collapsed branch.

    Parameters
    ----------
    dend : Dendrogram
    view : ViewState
        Must satisfy the closure invariant.
    labels : LabelSet, optional
        Resolves prototype leaf labels to display strings and tooltips.
        Omitted: leaf labels are displayed verbatim.

    Returns
    -------
    RenderNode
        Root of the induced tree.
    """
    check_view(dend, view)
    root = _render_node(dend, dend.root, None, view, labels)
    stack = [(dend.root, root)]
    while stack:
        node, rnode = stack.pop()
        if node not in view.expanded:
            continue
        for child in dend.children(node):
            cnode = _render_node(dend, child, rnode.prototype, view, labels)
            rnode.children.append(cnode)
            stack.append((child, cnode))
    return root


def view_frontier(dend: Dendrogram, view: ViewState) -> list[int]:
    """Maximal visible non-expanded nodes: the branches a reader sees."""
    check_view(dend, view)
    frontier: list[int] = []
    stack = [dend.root]
    while stack:
        node = stack.pop()
        if node in view.expanded:
            left, right = dend.children(node)
            stack.append(right)
            stack.append(left)
        else:
            frontier.append(node)
    return frontier


def export_clusters(dend: Dendrogram, view: ViewState) -> Clustering:
    """Partition of the leaves induced by the current visible frontier."""
    return _clustering_from_nodes(dend, view_frontier(dend, view), method="view")


def search_highest(
    dend: Dendrogram, query: str, labels: LabelSet | None = None
) -> tuple[int, tuple[int, ...]] | None:
    """Find the highest node whose display label matches the query exactly.

    Interior nodes are labelled by their prototype, so a label can occur
    many times along a lineage; only the occurrence closest to the root is
    returned.  Depth ties break to the smallest node id.

    Returns
    -------
    (node, path) or None
        ``path`` is the strict-ancestor chain root-first; expanding every
        node on it makes the match visible.  None when nothing matches.
    """
    if labels is not None and labels.kind != "text":
        labels = None  # image sets have no searchable text; match leaf labels
    depths = dend.depths
    best: tuple[int, int] | None = None
    for node in range(dend.n_nodes):
        leaf_label = dend.leaf_labels[dend.prototype(node)]
        display = leaf_label if labels is None else labels.display_for(leaf_label)
        if display != query:
            continue
        key = (int(depths[node]), node)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    node = best[1]
    return node, tuple(dend.ancestors(node))
