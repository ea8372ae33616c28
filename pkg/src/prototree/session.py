"""Saved sessions: a view bound to one specific dendrogram.

A session stores only the expanded node ids and the active label set,
plus the digest of the tree it belongs to.  Loading against a tree with
a different digest is refused, since node ids are meaningless elsewhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .dendrogram import Dendrogram
from .errors import DigestMismatchError, ValidationError
from .view import ViewState, check_view

SESSION_FORMAT_VERSION = 1


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class Session:
    dendrogram_digest: str
    view: ViewState
    created: str
    modified: str
    format_version: int = SESSION_FORMAT_VERSION


def new_session(dend: Dendrogram, view: ViewState | None = None) -> Session:
    now = _now()
    return Session(
        dendrogram_digest=dend.digest,
        view=view if view is not None else ViewState(),
        created=now,
        modified=now,
    )


def touch(session: Session, view: ViewState) -> Session:
    """Replace the view, refreshing the modified timestamp."""
    return replace(session, view=view, modified=_now())


def serialize_session(session: Session) -> bytes:
    payload = {
        "format_version": session.format_version,
        "dendrogram_digest": session.dendrogram_digest,
        "expanded": sorted(session.view.expanded),
        "active_label_set": session.view.active_label_set,
        "created": session.created,
        "modified": session.modified,
    }
    return (json.dumps(payload, separators=(",", ":")) + "\n").encode("utf-8")


def deserialize_session(data: bytes, dend: Dendrogram) -> Session:
    """Parse session bytes and bind them to ``dend``.

    Raises
    ------
    DigestMismatchError
        The session belongs to a different dendrogram.
    ValidationError
        Malformed payload, unknown format version, or an expanded set
        that is invalid for this tree.
    """
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed session payload: {exc}") from None
    if not isinstance(payload, dict):
        raise ValidationError("malformed session payload: not a JSON object")
    for key in (
        "format_version",
        "dendrogram_digest",
        "expanded",
        "active_label_set",
        "created",
        "modified",
    ):
        if key not in payload:
            raise ValidationError(f"session payload missing field {key!r}")
    version = payload["format_version"]
    if version != SESSION_FORMAT_VERSION:
        raise ValidationError(
            f"unknown session format_version {version!r} "
            f"(expected {SESSION_FORMAT_VERSION})"
        )
    digest = payload["dendrogram_digest"]
    if digest != dend.digest:
        raise DigestMismatchError(
            f"session was saved for dendrogram {digest} "
            f"but the loaded dendrogram is {dend.digest}"
        )
    expanded = payload["expanded"]
    if not isinstance(expanded, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in expanded
    ):
        raise ValidationError("session field 'expanded' must be a list of node ids")
    view = ViewState(
        expanded=frozenset(expanded),
        active_label_set=str(payload["active_label_set"]),
    )
    check_view(dend, view)
    return Session(
        dendrogram_digest=digest,
        view=view,
        created=str(payload["created"]),
        modified=str(payload["modified"]),
        format_version=version,
    )
