"""Interactive-scale hierarchical clustering with prototype-labelled branches.

Core pieces: agglomerative clustering under minimax or complete linkage
(`agglomerate`), an immutable `Dendrogram` whose every interior node
carries a prototype leaf, flat cuts (`cut_at_height`, `cut_top_k`,
`dynamic_cut`), an expand/collapse view layer (`ViewState`,
`visible_tree`, `search_highest`), saved sessions, file formats, a lazy
HTTP API (`create_app`), and the `prototree` command line.
"""

from .agglomerative import LINKAGES, agglomerate
from .cuts import (
    DEFAULT_TOP_K,
    Clustering,
    clustering_to_csv,
    cut_at_height,
    cut_top_k,
    dynamic_cut,
)
from .dendrogram import (
    TREE_FORMAT_VERSION,
    Dendrogram,
    attach_prototypes,
    load_tree,
    save_hclust_csv,
    save_tree,
    to_hclust_table,
)
from .dissimilarity import (
    DissimilarityMatrix,
    condensed_index,
    condensed_pair,
    load_dissimilarity,
    load_dissimilarity_binary,
    load_dissimilarity_csv,
    save_dissimilarity_binary,
    save_dissimilarity_csv,
)
from .errors import DigestMismatchError, IncompleteLabelSetError, ValidationError
from .estimator import PairwiseDissimilarity, PrototypeAgglomerative, as_dissimilarity
from .features import (
    FeatureMatrix,
    center_scale,
    correlation_dissimilarity,
    euclidean_dissimilarity,
    load_features,
)
from .labels import LabelSet, default_label_set, load_label_manifest
from .linkage import complete_linkage, d_max, minimax_linkage, minimax_radius_and_prototype
from .server import create_app
from .session import (
    SESSION_FORMAT_VERSION,
    Session,
    deserialize_session,
    new_session,
    serialize_session,
    touch,
)
from .view import (
    RenderNode,
    ViewState,
    check_view,
    collapse,
    expand,
    export_clusters,
    search_highest,
    view_frontier,
    visible_tree,
)

__version__ = "0.1.0"

__all__ = [
    "LINKAGES",
    "agglomerate",
    "DEFAULT_TOP_K",
    "Clustering",
    "clustering_to_csv",
    "cut_at_height",
    "cut_top_k",
    "dynamic_cut",
    "TREE_FORMAT_VERSION",
    "Dendrogram",
    "attach_prototypes",
    "load_tree",
    "save_hclust_csv",
    "save_tree",
    "to_hclust_table",
    "DissimilarityMatrix",
    "condensed_index",
    "condensed_pair",
    "load_dissimilarity",
    "load_dissimilarity_binary",
    "load_dissimilarity_csv",
    "save_dissimilarity_binary",
    "save_dissimilarity_csv",
    "DigestMismatchError",
    "IncompleteLabelSetError",
    "ValidationError",
    "PairwiseDissimilarity",
    "PrototypeAgglomerative",
    "as_dissimilarity",
    "FeatureMatrix",
    "center_scale",
    "correlation_dissimilarity",
    "euclidean_dissimilarity",
    "load_features",
    "LabelSet",
    "default_label_set",
    "load_label_manifest",
    "complete_linkage",
    "d_max",
    "minimax_linkage",
    "minimax_radius_and_prototype",
    "create_app",
    "SESSION_FORMAT_VERSION",
    "Session",
    "deserialize_session",
    "new_session",
    "serialize_session",
    "touch",
    "RenderNode",
    "ViewState",
    "check_view",
    "collapse",
    "expand",
    "export_clusters",
    "search_highest",
    "view_frontier",
    "visible_tree",
]
