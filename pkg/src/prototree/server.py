"""HTTP API serving a prototyped dendrogram to interactive clients.

The loaded tree is immutable, so every read endpoint is pure and
cacheable.  Mutable state is limited to the session store (content
addressed, write once) and the active label set (an atomic swap).
Clients keep their own expand/collapse state and fetch subtrees lazily.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import (
    FileResponse,
    HTMLResponse,
    JSONResponse,
    PlainTextResponse,
    Response,
)

from .cuts import DEFAULT_TOP_K, clustering_to_csv, cut_top_k, dynamic_cut
from .dendrogram import TREE_FORMAT_VERSION, Dendrogram
from .errors import DigestMismatchError, ValidationError
from .labels import LabelSet, default_label_set
from .session import deserialize_session
from .view import export_clusters, search_highest

PREFIX_RESULT_LIMIT = 20


@dataclass
class _ServerState:
    dend: Dendrogram | None
    label_sets: dict[str, LabelSet]
    active_label_set: str
    assets_root: Path | None
    ui_dir: Path | None
    state_dir: Path | None
    sessions: dict[str, bytes] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _store_session(st: _ServerState, data: bytes) -> str:
    """Write-once storage keyed by content hash; re-posting is a no-op."""
    sid = hashlib.sha256(data).hexdigest()
    with st.lock:
        if st.state_dir is None:
            st.sessions[sid] = data
        else:
            path = st.state_dir / f"{sid}.json"
            if not path.exists():
                fd, tmp = tempfile.mkstemp(dir=st.state_dir, suffix=".tmp")
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, path)
    return sid


def _load_session_bytes(st: _ServerState, sid: str) -> bytes | None:
    if st.state_dir is None:
        return st.sessions.get(sid)
    if not sid or any(c not in "0123456789abcdef" for c in sid):
        return None
    path = st.state_dir / f"{sid}.json"
    return path.read_bytes() if path.is_file() else None


def build_payload(
    dend: Dendrogram,
    start: int,
    labels: LabelSet,
    expanded: frozenset[int],
    depth: int,
) -> dict:
    """Nested NodePayload dict rooted at ``start``.

    Children are always present under expanded nodes; elsewhere they are
    included for ``depth`` further levels so clients can pre-render the
    next clicks.  ``show_label`` follows the real tree parent even when
    that parent is outside this payload.
    """

    def make(node: int, parent_proto: int | None) -> tuple[dict, int, bool]:
        proto = dend.prototype(node)
        leaf_label = dend.leaf_labels[proto]
        interior = not dend.is_leaf(node)
        payload = {
            "id": node,
            "height": dend.height(node),
            "size": dend.size(node),
            "label": labels.display_for(leaf_label),
            "show_label": parent_proto is None or proto != parent_proto,
            "collapsed": interior and node not in expanded,
            "has_children": interior,
        }
        tooltip = labels.tooltip_for(leaf_label)
        if tooltip is not None:
            payload["tooltip"] = tooltip
        return payload, proto, interior

    parent = dend.parent(start)
    top, proto, interior = make(start, dend.prototype(parent) if parent >= 0 else None)
    stack = [(start, top, proto, interior, depth)]
    while stack:
        node, payload, proto, interior, budget = stack.pop()
        if not interior:
            continue
        if node in expanded:
            child_budget = budget
        elif budget > 0:
            child_budget = budget - 1
        else:
            continue
        payload["children"] = []
        for child in dend.children(node):
            cpayload, cproto, cinterior = make(child, proto)
            payload["children"].append(cpayload)
            stack.append((child, cpayload, cproto, cinterior, child_budget))
    return top


def _parse_int(raw: str | None, name: str, default: int | None, minimum: int):
    if raw is None:
        if default is None:
            raise HTTPException(400, f"missing required parameter {name!r}")
        return default
    try:
        value = int(raw)
    except ValueError:
        raise HTTPException(400, f"{name} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise HTTPException(400, f"{name} must be >= {minimum}, got {value}")
    return value


def create_app(
    tree: Dendrogram | None = None,
    label_sets: Iterable[LabelSet] = (),
    active_label_set: str = "default",
    assets_root=None,
    ui_dir=None,
    state_dir=None,
) -> FastAPI:
    """Assemble the API around one loaded dendrogram.

    Parameters
    ----------
    tree : Dendrogram, optional
        Tree endpoints answer 409 until one is provided.
    label_sets : iterable of LabelSet
        Available in addition to the implicit "default" identity set.
        Completeness is checked on activation, not here.
    active_label_set : str
        Id of the initially active set.
    assets_root, ui_dir, state_dir : path-like, optional
        Thumbnail root, UI bundle directory, session directory.  Without
        a state dir, sessions live in process memory.
    """
    sets: dict[str, LabelSet] = {}
    if tree is not None:
        sets["default"] = default_label_set(tree)
    for ls in label_sets:
        sets[ls.id] = ls
    if tree is not None and active_label_set not in sets:
        raise ValidationError(f"unknown active label set {active_label_set!r}")

    st = _ServerState(
        dend=tree,
        label_sets=sets,
        active_label_set=active_label_set,
        assets_root=Path(assets_root) if assets_root is not None else None,
        ui_dir=Path(ui_dir) if ui_dir is not None else None,
        state_dir=Path(state_dir) if state_dir is not None else None,
    )
    if st.state_dir is not None:
        st.state_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="prototree", docs_url=None, redoc_url=None)
    app.state.prototree = st

    def need_tree() -> Dendrogram:
        if st.dend is None:
            raise HTTPException(409, "no dendrogram loaded")
        return st.dend

    def active_labels() -> LabelSet:
        return st.label_sets[st.active_label_set]

    @app.get("/api/tree")
    def api_tree(
        policy: str = "topk",
        k: str | None = None,
        min_size: str | None = None,
        depth: str | None = None,
    ):
        dend = need_tree()
        depth_n = _parse_int(depth, "depth", 2, 0)
        if policy == "topk":
            k_n = min(_parse_int(k, "k", DEFAULT_TOP_K, 1), dend.n)
            clustering = cut_top_k(dend, k_n)
            policy_out = {"policy": "topk", "k": k_n}
        elif policy == "dynamic":
            min_size_n = _parse_int(min_size, "min_size", None, 1)
            clustering = dynamic_cut(dend, min_size_n)
            policy_out = {"policy": "dynamic", "min_size": min_size_n}
        else:
            raise HTTPException(400, f"unknown policy {policy!r}")
        expanded: set[int] = set()
        for node in clustering.nodes:
            expanded.update(dend.ancestors(node))
        labels = active_labels()
        return {
            "format_version": TREE_FORMAT_VERSION,
            "dendrogram_digest": dend.digest,
            "n": dend.n,
            "root_height": dend.height(dend.root),
            "label_set": st.active_label_set,
            "label_kind": labels.kind,
            "policy": policy_out,
            "expanded": sorted(expanded),
            "root": build_payload(dend, dend.root, labels, frozenset(expanded), depth_n),
        }

    @app.get("/api/node/{node_id}/children")
    def api_children(node_id: int, request: Request, depth: str | None = None):
        dend = need_tree()
        depth_n = _parse_int(depth, "depth", 1, 0)
        if node_id < 0 or node_id >= dend.n_nodes:
            raise HTTPException(404, f"unknown node {node_id}")
        if dend.is_leaf(node_id):
            raise HTTPException(400, f"node {node_id} is a leaf")
        etag = f'"{dend.digest[:16]}:{node_id}:{depth_n}:{st.active_label_set}"'
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        payload = build_payload(dend, node_id, active_labels(), frozenset(), depth_n)
        return JSONResponse(payload, headers={"ETag": etag})

    @app.get("/api/search")
    def api_search(q: str = "", mode: str = "exact"):
        dend = need_tree()
        if not q:
            raise HTTPException(400, "empty query")
        labels = active_labels()
        if mode == "exact":
            hit = search_highest(dend, q, labels)
            if hit is None:
                return {}
            node, path = hit
            return {"node": node, "path": list(path)}
        if mode == "prefix":
            if labels.kind == "text":
                universe = {labels.display_for(lab) for lab in dend.leaf_labels}
            else:
                universe = set(dend.leaf_labels)
            return {
                "labels": sorted(
                    lab for lab in universe if lab.startswith(q)
                )[:PREFIX_RESULT_LIMIT]
            }
        raise HTTPException(400, f"unknown mode {mode!r}")

    @app.post("/api/session", status_code=201)
    async def api_session_post(request: Request):
        dend = need_tree()
        data = await request.body()
        try:
            deserialize_session(data, dend)
        except DigestMismatchError as exc:
            raise HTTPException(409, str(exc)) from None
        except ValidationError as exc:
            raise HTTPException(400, str(exc)) from None
        return {"id": _store_session(st, data)}

    @app.get("/api/session/{sid}")
    def api_session_get(sid: str):
        data = _load_session_bytes(st, sid)
        if data is None:
            raise HTTPException(404, f"unknown session {sid!r}")
        return Response(content=data, media_type="application/json")

    @app.get("/api/export")
    def api_export(session: str = ""):
        dend = need_tree()
        if not session:
            raise HTTPException(400, "session id required")
        data = _load_session_bytes(st, session)
        if data is None:
            raise HTTPException(404, f"unknown session {session!r}")
        try:
            sess = deserialize_session(data, dend)
        except DigestMismatchError as exc:
            raise HTTPException(409, str(exc)) from None
        text = clustering_to_csv(dend, export_clusters(dend, sess.view))
        return PlainTextResponse(
            text,
            media_type="text/csv",
            headers={"Content-Disposition": 'attachment; filename="clusters.csv"'},
        )

    @app.get("/api/labelsets")
    def api_labelsets():
        return {
            "active": st.active_label_set,
            "label_sets": [
                {"id": ls.id, "kind": ls.kind, "entries": len(ls.entries)}
                for ls in st.label_sets.values()
            ],
        }

    @app.post("/api/labelsets/activate")
    async def api_labelsets_activate(request: Request):
        dend = need_tree()
        try:
            body = json.loads(await request.body())
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise HTTPException(400, "body must be JSON") from None
        if not isinstance(body, dict) or "id" not in body:
            raise HTTPException(400, 'body must be {"id": <label set id>}')
        set_id = str(body["id"])
        ls = st.label_sets.get(set_id)
        if ls is None:
            raise HTTPException(404, f"unknown label set {set_id!r}")
        missing = ls.missing_leaves(dend)
        if missing:
            raise HTTPException(
                422,
                detail={
                    "message": f"label set {set_id!r} is missing "
                    f"{len(missing)} leaves",
                    "missing": missing,
                },
            )
        st.active_label_set = set_id
        return {"active": set_id}

    @app.get("/")
    def index():
        if st.ui_dir is not None:
            page = st.ui_dir / "index.html"
            if page.is_file():
                return FileResponse(page)
        return HTMLResponse(
            "<!doctype html><title>prototree</title>"
            "<p>prototree API. Endpoints: /api/tree, /api/node/{id}/children, "
            "/api/search, /api/session, /api/export, /api/labelsets.</p>"
        )

    @app.get("/assets/{rest:path}")
    def assets(rest: str):
        for root in (st.assets_root, st.ui_dir):
            if root is None:
                continue
            base = root.resolve()
            target = (base / rest).resolve()
            # refuse any path that climbs out of the configured root
            if target.is_file() and target.is_relative_to(base):
                return FileResponse(target)
        raise HTTPException(404, f"no such asset {rest!r}")

    # registered last so /api and /assets always win; lets the UI bundle
    # load its scripts and styles relative to /
    @app.get("/{rest:path}")
    def ui_file(rest: str):
        if st.ui_dir is not None:
            base = st.ui_dir.resolve()
            target = (base / rest).resolve()
            if target.is_file() and target.is_relative_to(base):
                return FileResponse(target)
        raise HTTPException(404, f"no such path {rest!r}")

    return app
