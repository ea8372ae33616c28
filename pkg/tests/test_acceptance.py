"""Acceptance gate: one test per shipped guarantee, each printing a verdict.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines.
Budgeted checks assert their own wall-clock and memory limits, so a
regression that merely slows things down fails loudly too.
"""

import resource
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

import prototree.agglomerative as agglomerative_mod
from prototree import (
    ViewState,
    agglomerate,
    create_app,
    cut_at_height,
    cut_top_k,
    deserialize_session,
    dynamic_cut,
    euclidean_dissimilarity,
    expand,
    load_dissimilarity,
    load_tree,
    new_session,
    save_dissimilarity_binary,
    save_dissimilarity_csv,
    save_tree,
    search_highest,
    serialize_session,
    visible_tree,
)
from prototree.estimator import as_feature_matrix

from conftest import dm_from_square
from oracle import oracle_agglomerate, random_square

TOL = 1e-12


def _report(name: str, ok: bool, detail: str):
    print(f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def _random_dm(rng, n):
    return dm_from_square(random_square(rng, n))


def _random_sizes(rng, count, low, high):
    return [int(v) for v in rng.integers(low, high + 1, size=count)]


def _flatten(rendered):
    out = []
    stack = [(rendered, None)]
    while stack:
        node, parent = stack.pop()
        out.append((node, parent))
        for child in node.children:
            stack.append((child, node))
    return out


def _random_view(dend, rng, steps):
    view = ViewState()
    for _ in range(steps):
        frontier = [
            node
            for node, parent in _flatten(visible_tree(dend, view))
            if node.has_children and node.collapsed
        ]
        if not frontier:
            break
        view = expand(dend, view, int(rng.choice([n.id for n in frontier])))
    return view


class TestPrototypeGuarantee:
    def test_leaves_within_cut_height_of_prototype(self):
        started = time.perf_counter()
        rng = np.random.default_rng(2026)
        sizes = _random_sizes(rng, 100, 5, 200)
        violations = 0
        checked = 0
        for i, n in enumerate(sizes):
            dm = _random_dm(rng, n)
            dend = agglomerate(dm, linkage="minimax")
            square = dm.to_square()
            # every cut cluster is a tree node with height <= h, so the
            # per-node bound covers every cut height at once
            for node in range(dend.n, dend.n_nodes):
                leaves = dend.subtree_leaves(node)
                worst = float(square[leaves, dend.prototype(node)].max())
                checked += 1
                if worst > dend.height(node) + TOL:
                    violations += 1
            if i < 10:
                heights = sorted({dend.height(v) for v in range(dend.n_nodes)})
                for h in heights:
                    clustering = cut_at_height(dend, h)
                    for cluster, proto in zip(
                        clustering.nodes, clustering.prototypes
                    ):
                        leaves = dend.subtree_leaves(cluster)
                        if float(square[leaves, proto].max()) > h + TOL:
                            violations += 1
        elapsed = time.perf_counter() - started
        _report(
            "prototype guarantee",
            violations == 0 and elapsed < 120,
            f"100 matrices, {checked} clusters checked, "
            f"{violations} violations, {elapsed:.1f}s (budget 120s)",
        )


class TestOracleEquivalence:
    def test_engine_matches_naive_recompute(self):
        started = time.perf_counter()
        rng = np.random.default_rng(4096)
        sizes = _random_sizes(rng, 100, 5, 200)
        mismatches = 0
        for n in sizes:
            square = random_square(rng, n)
            dend = agglomerate(dm_from_square(square), linkage="minimax")
            merges, heights, protos = oracle_agglomerate(square)
            same = (
                dend.merges.tobytes() == merges.astype(np.int64).tobytes()
                and dend.heights.tobytes() == heights.tobytes()
                and dend.prototypes.tobytes()
                == protos.astype(np.int64).tobytes()
            )
            mismatches += 0 if same else 1
        elapsed = time.perf_counter() - started
        _report(
            "oracle equivalence",
            mismatches == 0 and elapsed < 300,
            f"100 instances, {mismatches} mismatches, bit-identical "
            f"heights, {elapsed:.1f}s (budget 300s)",
        )


class TestMembershipAndDeterminism:
    def test_prototype_membership(self):
        rng = np.random.default_rng(7)
        bad = 0
        for n in _random_sizes(rng, 10, 5, 120):
            for linkage in ("minimax", "complete"):
                dend = agglomerate(_random_dm(rng, n), linkage=linkage)
                for node in range(dend.n_nodes):
                    if dend.prototype(node) not in dend.subtree_leaves(node):
                        bad += 1
        _report(
            "prototype membership",
            bad == 0,
            f"20 trees, every node's prototype inside its subtree "
            f"({bad} exceptions)",
        )

    def test_determinism_across_runs_and_kernels(self):
        rng = np.random.default_rng(8)
        diffs = 0
        for n in _random_sizes(rng, 6, 5, 120):
            dm = _random_dm(rng, n)
            base = agglomerate(dm).digest
            if agglomerate(dm).digest != base:
                diffs += 1
            saved = agglomerative_mod._USE_NUMBA
            try:
                agglomerative_mod._USE_NUMBA = False
                if agglomerate(dm).digest != base:
                    diffs += 1
            finally:
                agglomerative_mod._USE_NUMBA = saved
        _report(
            "determinism",
            diffs == 0,
            f"6 inputs, repeat runs and both compute kernels agree "
            f"({diffs} diffs)",
        )


@pytest.mark.scale
class TestScale:
    def test_five_thousand_leaves(self, tmp_path):
        rng = np.random.default_rng(99)
        points = rng.normal(size=(5000, 8)) + rng.integers(
            0, 5, size=(5000, 1)
        ) * 3.0
        dm = euclidean_dissimilarity(as_feature_matrix(points))
        started = time.perf_counter()
        dend = agglomerate(dm, linkage="minimax")
        cluster_s = time.perf_counter() - started
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
        path = tmp_path / "scale.json"
        save_tree(dend, path)

        started = time.perf_counter()
        reloaded = load_tree(path)
        client = TestClient(create_app(reloaded))
        status = client.get("/api/tree").status_code
        serve_s = time.perf_counter() - started
        ok = (
            dend.n == 5000
            and cluster_s < 600
            and peak < 4 * 2**30
            and status == 200
            and serve_s < 1.0
        )
        _report(
            "scale",
            ok,
            f"n=5000 clustered in {cluster_s:.1f}s (budget 600s), peak rss "
            f"{peak / 2**30:.2f} GiB (budget 4), load+first /api/tree "
            f"{serve_s:.3f}s (budget 1s)",
        )


class TestCutSemantics:
    def test_documented_examples(self, tree4, tree3):
        at_five = cut_at_height(tree4, 5.0)
        checks = [
            at_five.assignment.tolist() == [0, 0, 1, 1],
            at_five.prototypes == (0, 2),
            cut_top_k(tree4, 1).nodes == (6,),
            cut_top_k(tree4, 4).assignment.tolist() == [0, 1, 2, 3],
            dynamic_cut(tree4, 4).nodes == (6,),
            dynamic_cut(tree4, 2).nodes == (4, 5),
            dynamic_cut(tree3, 2).nodes == (tree3.root,),
        ]
        _report(
            "cut semantics",
            all(checks),
            f"4-point height/top-k cuts and dynamic traces "
            f"({sum(checks)}/{len(checks)} checks)",
        )


class TestLabelVisibility:
    def test_rule_matches_recomputation(self):
        rng = np.random.default_rng(31)
        mismatches = 0
        nodes = 0
        for n in _random_sizes(rng, 30, 4, 80):
            dend = agglomerate(_random_dm(rng, n))
            view = _random_view(dend, rng, int(rng.integers(0, n)))
            for node, parent in _flatten(visible_tree(dend, view)):
                nodes += 1
                expected = parent is None or dend.prototype(
                    node.id
                ) != dend.prototype(parent.id)
                if node.show_label != expected:
                    mismatches += 1
        _report(
            "label visibility",
            mismatches == 0,
            f"30 random trees, {nodes} rendered nodes, "
            f"{mismatches} mismatches",
        )


class TestSearch:
    def test_highest_match_is_depth_minimal(self):
        rng = np.random.default_rng(47)
        wrong = 0
        interior_hits = 0
        leaf_hits = 0
        for n in _random_sizes(rng, 20, 4, 60):
            dend = agglomerate(_random_dm(rng, n))
            depths = dend.depths
            proto_of_interior = {
                dend.prototype(v) for v in range(dend.n, dend.n_nodes)
            }
            for leaf in range(dend.n):
                query = dend.leaf_labels[leaf]
                hit = search_highest(dend, query)
                assert hit is not None
                node, path = hit
                matches = [
                    v
                    for v in range(dend.n_nodes)
                    if dend.leaf_labels[dend.prototype(v)] == query
                ]
                if depths[node] != min(depths[m] for m in matches):
                    wrong += 1
                if list(path) != dend.ancestors(node):
                    wrong += 1
                if leaf in proto_of_interior:
                    interior_hits += 0 if node >= dend.n else 1
                else:
                    leaf_hits += 0 if node == leaf else 1
        ok = wrong == 0 and interior_hits == 0 and leaf_hits == 0
        _report(
            "search",
            ok,
            "20 trees, exhaustive scan: result depth minimal, prototype "
            "labels hit interior nodes, others hit leaves "
            f"({wrong + interior_hits + leaf_hits} exceptions)",
        )


class TestRoundTrips:
    def test_session_csv_binary_and_lazy_crawl(self, tmp_path):
        rng = np.random.default_rng(61)
        problems = []

        for n in _random_sizes(rng, 5, 4, 50):
            dend = agglomerate(_random_dm(rng, n))
            view = _random_view(dend, rng, int(rng.integers(0, n)))
            sess = new_session(dend, view)
            if deserialize_session(serialize_session(sess), dend) != sess:
                problems.append("session")

        for n in _random_sizes(rng, 5, 3, 40):
            dm = _random_dm(rng, n)
            csv_path = tmp_path / "m.csv"
            save_dissimilarity_csv(dm, csv_path)
            via_csv = load_dissimilarity(csv_path, format="csv")
            bin_path = tmp_path / "m.pdm"
            save_dissimilarity_binary(via_csv, bin_path)
            via_bin = load_dissimilarity(bin_path, format="binary")
            if (
                via_bin.values.tobytes() != dm.values.tobytes()
                or via_bin.labels != dm.labels
            ):
                problems.append("csv/binary")

        crawled = 0
        for n in _random_sizes(rng, 20, 4, 60):
            dend = agglomerate(_random_dm(rng, n))
            with TestClient(create_app(dend)) as client:
                seen = {}
                root = client.get(
                    "/api/tree", params={"k": 1, "depth": 0}
                ).json()["root"]
                stack = [root]
                while stack:
                    payload = stack.pop()
                    seen[payload["id"]] = payload
                    if payload["has_children"]:
                        kids = client.get(
                            f"/api/node/{payload['id']}/children"
                        ).json()["children"]
                        payload["child_ids"] = [c["id"] for c in kids]
                        stack.extend(kids)
            view = ViewState(
                expanded=frozenset(range(dend.n, dend.n_nodes))
            )
            for node, parent in _flatten(visible_tree(dend, view)):
                got = seen.get(node.id)
                if (
                    got is None
                    or got["height"] != node.height
                    or got["label"] != node.label
                    or got["size"] != node.size
                    or got["show_label"] != node.show_label
                    or got.get("child_ids", [])
                    != [c.id for c in node.children]
                ):
                    problems.append(f"crawl node {node.id}")
            crawled += 1

        _report(
            "round trips",
            not problems,
            f"sessions, csv<->binary, lazy crawl of {crawled} trees "
            f"({len(problems)} problems)",
        )
