"""Operator command line: cluster, cut, serve.

Exit codes: 0 success, 2 usage or validation problems, 1 anything
unexpected.  Every option can also be supplied through environment
variables prefixed PROTOTREE_<COMMAND>_<OPTION>.
"""

from __future__ import annotations

import hashlib
import json
import resource
import socket
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click

from .agglomerative import LINKAGES, agglomerate
from .cuts import clustering_to_csv, cut_at_height, cut_top_k, dynamic_cut
from .dendrogram import load_tree, save_tree
from .dissimilarity import load_dissimilarity
from .errors import ValidationError
from .features import (
    center_scale,
    correlation_dissimilarity,
    euclidean_dissimilarity,
    load_features,
)
from .labels import load_label_manifest
from .server import create_app


def _tool_version() -> str:
    try:
        from importlib.metadata import version

        return version("prototree")
    except Exception:
        return "unknown"


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


@click.group(context_settings={"auto_envvar_prefix": "PROTOTREE"})
@click.version_option(_tool_version(), prog_name="prototree")
def main():
    """Prototype-labelled hierarchical clustering tools."""


@main.command()
@click.option("--input", "input_path", required=True, help="Input data file.")
@click.option(
    "--format",
    "input_format",
    type=click.Choice(["csv", "binary", "features"]),
    default="csv",
    show_default=True,
    help="csv/binary: dissimilarity matrix; features: observation matrix.",
)
@click.option(
    "--metric",
    type=click.Choice(["corr", "euclid"]),
    default=None,
    help="Dissimilarity for --format features: 1-correlation or l2.",
)
@click.option("--scale", is_flag=True, help="Center and scale feature columns first.")
@click.option(
    "--linkage", type=click.Choice(list(LINKAGES)), required=True,
    help="Cluster-distance rule.",
)
@click.option("--output", required=True, help="Tree file to write.")
def cluster(input_path, input_format, metric, scale, linkage, output):
    """Agglomerate the input into a prototyped dendrogram tree file."""
    started = time.perf_counter()
    src = Path(input_path)
    try:
        raw = src.read_bytes()
    except OSError as exc:
        _fail(f"cannot read input {input_path}: {exc}")
    if input_format == "features":
        if metric is None:
            _fail("--format features requires --metric")
    else:
        if metric is not None:
            _fail("--metric only applies to --format features")
        if scale:
            _fail("--scale only applies to --format features")
    try:
        if input_format == "features":
            fm = load_features(src)
            if scale:
                fm = center_scale(fm)
            dm = (
                correlation_dissimilarity(fm)
                if metric == "corr"
                else euclidean_dissimilarity(fm)
            )
        else:
            dm = load_dissimilarity(src, format=input_format)
        dend = agglomerate(dm, linkage=linkage)
    except ValidationError as exc:
        _fail(str(exc))
    save_tree(dend, output)
    manifest = {
        "input": str(input_path),
        "format": input_format,
        "metric": metric,
        "scale": bool(scale),
        "linkage": linkage,
        "output": str(output),
        "n": dend.n,
        "input_digest": hashlib.sha256(raw).hexdigest(),
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "peak_rss_bytes": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024,
        "tool_version": _tool_version(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    manifest_path = f"{output}.manifest.json"
    Path(manifest_path).write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    click.echo(f"wrote {output} (n={dend.n}, linkage={linkage}) + {manifest_path}")


@main.command()
@click.option("--tree", "tree_path", required=True, help="Tree file from `cluster`.")
@click.option("--height", type=float, default=None, help="Cut at this height.")
@click.option("--k", type=int, default=None, help="Cut into k clusters.")
@click.option("--dynamic", is_flag=True, help="Adaptive cut (needs --min-size).")
@click.option("--min-size", type=int, default=None, help="Minimum cluster size.")
@click.option("--output", required=True, help="Cluster CSV to write.")
def cut(tree_path, height, k, dynamic, min_size, output):
    """Flatten a tree into clusters (one of --height / --k / --dynamic)."""
    chosen = sum([height is not None, k is not None, dynamic])
    if chosen != 1:
        _fail("choose exactly one of --height, --k, --dynamic")
    if dynamic and min_size is None:
        _fail("--dynamic requires --min-size")
    if min_size is not None and not dynamic:
        _fail("--min-size only applies with --dynamic")
    try:
        dend = load_tree(tree_path)
    except (OSError, ValidationError) as exc:
        _fail(str(exc))
    try:
        if height is not None:
            clustering = cut_at_height(dend, height)
        elif k is not None:
            clustering = cut_top_k(dend, k)
        else:
            clustering = dynamic_cut(dend, min_size)
    except (ValidationError, ValueError) as exc:
        _fail(str(exc))
    Path(output).write_text(clustering_to_csv(dend, clustering), encoding="utf-8")
    click.echo(f"wrote {output}: {clustering.n_clusters} clusters")


@main.command()
@click.option("--tree", "tree_path", required=True, help="Tree file from `cluster`.")
@click.option(
    "--labels",
    "label_paths",
    multiple=True,
    help="Label manifest JSON (repeatable).",
)
@click.option("--assets", default=None, help="Thumbnail root served at /assets/.")
@click.option("--ui", default=None, help="UI bundle directory (serves its index.html).")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--state", default=None, help="Session storage directory.")
def serve(tree_path, label_paths, assets, ui, port, host, state):
    """Serve the API and UI for one tree; blocks until interrupted."""
    try:
        dend = load_tree(tree_path)
    except (OSError, ValidationError) as exc:
        _fail(str(exc))
    label_sets = []
    assets_root = Path(assets) if assets else None
    for manifest_path in label_paths:
        try:
            ls = load_label_manifest(manifest_path)
        except (OSError, ValidationError) as exc:
            _fail(str(exc))
        missing = ls.missing_leaves(dend)
        if missing:
            _fail(
                f"label set {ls.id!r} from {manifest_path} is missing "
                f"{len(missing)} leaves: {', '.join(missing)}"
            )
        if ls.kind == "image":
            # a manifest may carry its own asset root, relative to itself
            root = assets_root
            if root is None and ls.assets_root:
                root = Path(manifest_path).parent / ls.assets_root
            try:
                ls.check_assets(root)
            except ValidationError as exc:
                _fail(str(exc))
            if assets_root is None:
                assets_root = root
        label_sets.append(ls)
    app = create_app(
        tree=dend,
        label_sets=label_sets,
        assets_root=assets_root,
        ui_dir=ui,
        state_dir=state,
    )
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.bind((host, port))
        probe.close()
    except OSError as exc:
        _fail(f"cannot bind {host}:{port}: {exc}")
    click.echo(f"serving {tree_path} on http://{host}:{port}/")
    import uvicorn

    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()
