"""Swappable leaf label sets: display text or thumbnail images.

A label set is independent of the clustering, so the same dendrogram can
be re-read with different labels without recomputing anything.
Completeness against a dendrogram is checked when the set is bound, not
when the manifest is parsed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dendrogram import Dendrogram
from .errors import IncompleteLabelSetError, ValidationError

KINDS = ("text", "image")


@dataclass(eq=False)
class LabelSet:
    """Mapping from dendrogram leaf labels to display strings or image paths."""

    id: str
    kind: str
    entries: dict[str, str] = field(repr=False)
    tooltips: dict[str, str] = field(default_factory=dict, repr=False)
    assets_root: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"label set {self.id!r}: unknown kind {self.kind!r}")

    def display_for(self, leaf_label: str) -> str:
        """Display value for a leaf: text, or an image path for image sets."""
        return self.entries.get(leaf_label, leaf_label)

    def tooltip_for(self, leaf_label: str) -> str | None:
        return self.tooltips.get(leaf_label)

    def missing_leaves(self, dend: Dendrogram) -> list[str]:
        return sorted(set(dend.leaf_labels) - self.entries.keys())

    def check_complete(self, dend: Dendrogram) -> None:
        missing = self.missing_leaves(dend)
        if missing:
            raise IncompleteLabelSetError(self.id, missing)

    def check_assets(self, assets_root) -> None:
        """For image sets: every image path must resolve inside the asset root."""
        if self.kind != "image":
            return
        if assets_root is None:
            raise ValidationError(
                f"label set {self.id!r} uses images but no asset root is configured"
            )
        root = Path(assets_root).resolve()
        for leaf, rel in self.entries.items():
            target = (root / rel).resolve()
            if not target.is_relative_to(root):
                raise ValidationError(
                    f"label set {self.id!r}: image path {rel!r} for leaf {leaf!r} "
                    f"escapes the asset root"
                )
            if not target.is_file():
                raise ValidationError(
                    f"label set {self.id!r}: image {rel!r} for leaf {leaf!r} "
                    f"not found under {root}"
                )


def default_label_set(dend: Dendrogram, id: str = "default") -> LabelSet:
    """Identity text labels taken straight from the dendrogram leaves."""
    return LabelSet(id=id, kind="text", entries={lab: lab for lab in dend.leaf_labels})


def _reject_duplicate_keys(pairs):
    seen = set()
    out = {}
    for key, value in pairs:
        if key in seen:
            raise ValidationError(f"duplicate entry for leaf {key!r}")
        seen.add(key)
        out[key] = value
    return out


def load_label_manifest(path) -> LabelSet:
    """Parse a label manifest JSON file (schema in docs/formats.md)."""
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh, object_pairs_hook=_reject_duplicate_keys)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON: {exc}") from None
        except ValidationError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: manifest must be a JSON object")
    for key in ("id", "kind", "entries"):
        if key not in payload:
            raise ValidationError(f"{path}: missing field {key!r}")
    kind = payload["kind"]
    if kind not in KINDS:
        raise ValidationError(f"{path}: unknown kind {kind!r}")
    value_key = "label" if kind == "text" else "image"
    entries: dict[str, str] = {}
    tooltips: dict[str, str] = {}
    for leaf, entry in payload["entries"].items():
        if not isinstance(entry, dict) or value_key not in entry:
            raise ValidationError(
                f"{path}: entry for leaf {leaf!r} must be an object with a "
                f"{value_key!r} field"
            )
        entries[leaf] = str(entry[value_key])
        if "tooltip" in entry:
            tooltips[leaf] = str(entry["tooltip"])
    return LabelSet(
        id=str(payload["id"]),
        kind=kind,
        entries=entries,
        tooltips=tooltips,
        assets_root=payload.get("assets_root"),
    )
