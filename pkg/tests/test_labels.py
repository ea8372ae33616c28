import json

import pytest

from prototree import (
    IncompleteLabelSetError,
    LabelSet,
    ValidationError,
    default_label_set,
    load_label_manifest,
)


def write_manifest(tmp_path, payload, name="labels.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


TEXT_MANIFEST = {
    "id": "names",
    "kind": "text",
    "entries": {
        "a": {"label": "Alpha"},
        "b": {"label": "Beta", "tooltip": "second letter"},
        "c": {"label": "Gamma"},
        "d": {"label": "Delta"},
    },
}


class TestManifestLoading:
    def test_text_manifest(self, tmp_path):
        ls = load_label_manifest(write_manifest(tmp_path, TEXT_MANIFEST))
        assert ls.id == "names"
        assert ls.kind == "text"
        assert len(ls.entries) == 4
        assert ls.display_for("a") == "Alpha"

    def test_tooltips_preserved(self, tmp_path):
        ls = load_label_manifest(write_manifest(tmp_path, TEXT_MANIFEST))
        assert ls.tooltip_for("b") == "second letter"
        assert ls.tooltip_for("a") is None

    def test_image_manifest(self, tmp_path):
        payload = {
            "id": "thumbs",
            "kind": "image",
            "assets_root": "thumbs",
            "entries": {"a": {"image": "a.png"}, "b": {"image": "b.png"}},
        }
        ls = load_label_manifest(write_manifest(tmp_path, payload))
        assert ls.kind == "image"
        assert ls.display_for("a") == "a.png"
        assert ls.assets_root == "thumbs"

    def test_unknown_kind(self, tmp_path):
        payload = {"id": "x", "kind": "audio", "entries": {}}
        with pytest.raises(ValidationError, match="unknown kind 'audio'"):
            load_label_manifest(write_manifest(tmp_path, payload))

    def test_duplicate_leaf_entries(self, tmp_path):
        path = tmp_path / "dup.json"
        path.write_text(
            '{"id":"x","kind":"text","entries":'
            '{"a":{"label":"1"},"a":{"label":"2"}}}'
        )
        with pytest.raises(ValidationError, match="duplicate entry for leaf 'a'"):
            load_label_manifest(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{oops")
        with pytest.raises(ValidationError, match="not valid JSON"):
            load_label_manifest(path)

    def test_missing_field(self, tmp_path):
        with pytest.raises(ValidationError, match="missing field 'entries'"):
            load_label_manifest(
                write_manifest(tmp_path, {"id": "x", "kind": "text"})
            )

    def test_entry_missing_value_key(self, tmp_path):
        payload = {"id": "x", "kind": "text", "entries": {"a": {"tooltip": "t"}}}
        with pytest.raises(ValidationError, match="'label' field"):
            load_label_manifest(write_manifest(tmp_path, payload))


class TestBinding:
    def test_complete_set_binds(self, tree4, tmp_path):
        ls = load_label_manifest(write_manifest(tmp_path, TEXT_MANIFEST))
        ls.check_complete(tree4)  # no error

    def test_missing_leaf_listed(self, tree4):
        ls = LabelSet(
            id="partial",
            kind="image",
            entries={"a": "a.png", "b": "b.png", "c": "c.png"},
        )
        with pytest.raises(IncompleteLabelSetError) as err:
            ls.check_complete(tree4)
        assert err.value.missing == ["d"]
        assert err.value.label_set_id == "partial"
        assert "'partial'" in str(err.value)

    def test_default_set_is_identity(self, tree4):
        ls = default_label_set(tree4)
        assert ls.kind == "text"
        assert ls.display_for("c") == "c"
        ls.check_complete(tree4)


class TestAssets:
    def make_image_set(self):
        return LabelSet(
            id="thumbs", kind="image", entries={"a": "a.png", "b": "sub/b.png"}
        )

    def test_assets_resolve(self, tmp_path):
        (tmp_path / "a.png").write_bytes(b"png")
        (tmp_path / "sub").mkdir()
        (tmp_path / "sub" / "b.png").write_bytes(b"png")
        self.make_image_set().check_assets(tmp_path)

    def test_missing_asset(self, tmp_path):
        (tmp_path / "a.png").write_bytes(b"png")
        with pytest.raises(ValidationError, match="'sub/b.png'.*not found"):
            self.make_image_set().check_assets(tmp_path)

    def test_escaping_path_rejected(self, tmp_path):
        root = tmp_path / "root"
        root.mkdir()
        (tmp_path / "outside.png").write_bytes(b"png")
        ls = LabelSet(
            id="thumbs", kind="image", entries={"a": "../outside.png"}
        )
        with pytest.raises(ValidationError, match="escapes the asset root"):
            ls.check_assets(root)

    def test_image_set_requires_root(self):
        with pytest.raises(ValidationError, match="no asset root"):
            self.make_image_set().check_assets(None)

    def test_text_set_ignores_assets(self):
        LabelSet(id="t", kind="text", entries={"a": "A"}).check_assets(None)
