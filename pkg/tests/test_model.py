"""Core tree model: creation, exchanges, assembly, deletion, topology."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctree.engine import Engine
from ctree.errors import (
    LifecycleError,
    NotFoundError,
    StructuralError,
    ValidationError,
    VolatilityError,
)
from ctree.flow import CrossPolicy, DownstreamPolicy, MergeSpec, Selection
from ctree.model import check_tree_shape
from ctree.provider import MockProvider


def test_fresh_tree_is_minimal(engine):
    t = engine.create_tree("research session")
    topo = engine.topology(t)
    assert len(topo["nodes"]) == 1
    assert topo["edges"] == []
    assert topo["nodes"][0]["units"] == 0
    assert topo["nodes"][0]["status"] == "active"
    assert topo["nodes"][0]["volatile"] is False


def test_empty_title_rejected(engine):
    with pytest.raises(ValidationError):
        engine.create_tree("")


def test_trees_are_independent(engine):
    t1 = engine.create_tree("one")
    t2 = engine.create_tree("two")
    assert t1 != t2
    root1 = engine.topology(t1)["root"]
    engine.record_exchange(t1, root1, "h", "r")
    assert engine.topology(t1)["nodes"][0]["units"] == 1
    assert engine.topology(t2)["nodes"][0]["units"] == 0


def test_exchanges_append_in_order(engine):
    t = engine.create_tree("x")
    root = engine.topology(t)["root"]
    expected = []
    for i in range(3):
        engine.record_exchange(t, root, f"h{i}", f"r{i}")
        expected.append((f"h{i}", f"r{i}"))
    units = engine._handles[t].tree.nodes[root].window.native_units()
    assert [(u.human, u.model) for u in units] == expected
    seqs = [u.created_seq for u in units]
    assert seqs == sorted(seqs) and len(set(seqs)) == 3


def test_exchange_on_terminal_node_rejected(engine):
    t = engine.create_tree("x")
    root = engine.topology(t)["root"]
    child = engine.create_branch(t, root, "c", True, DownstreamPolicy("none"))
    engine.delete_node(t, child, "purge")
    with pytest.raises(LifecycleError):
        engine.record_exchange(t, child, "h", "r")


class TestAssemble:
    def test_single_node_matches_linear_formula(self, engine):
        # oracle: direct concatenation h1,r1,...,h_{n-1},r_{n-1},h_n
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        pairs = [(f"h{i}", f"r{i}") for i in range(1, 3)]
        for h, r in pairs:
            engine.record_exchange(t, root, h, r)
        got = [(m.role, m.text) for m in engine.assemble_context(t, root, "h3")]
        oracle = []
        for h, r in pairs:
            oracle += [("human", h), ("model", r)]
        oracle.append(("human", "h3"))
        assert got == oracle

    @given(
        pairs=st.lists(
            st.tuples(st.text(max_size=8), st.text(max_size=8)), max_size=6
        )
    )
    def test_single_node_equivalence_property(self, pairs):
        engine = Engine(provider=MockProvider())
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        for h, r in pairs:
            engine.record_exchange(t, root, h, r)
        got = [(m.role, m.text) for m in engine.assemble_context(t, root, "next")]
        oracle = [m for h, r in pairs for m in (("human", h), ("model", r))]
        assert got == oracle + [("human", "next")]

    def test_empty_window(self, engine):
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        msgs = engine.assemble_context(t, root, "h1")
        assert [(m.role, m.text) for m in msgs] == [("human", "h1")]

    def test_child_with_full_policy(self, engine):
        # oracle: parent snapshot flattened, then child's native units, then human
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        engine.record_exchange(t, root, "h1p", "r1p")
        engine.record_exchange(t, root, "h2p", "r2p")
        child = engine.create_branch(t, root, "c", False, DownstreamPolicy("full"))
        engine.record_exchange(t, child, "h1c", "r1c")
        got = [m.text for m in engine.assemble_context(t, child, "h")]
        assert got == ["h1p", "r1p", "h2p", "r2p", "h1c", "r1c", "h"]

    def test_terminal_node_rejected(self, engine):
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        child = engine.create_branch(t, root, "c", False, DownstreamPolicy("none"))
        engine.delete_node(t, child, "archive")
        with pytest.raises(LifecycleError):
            engine.assemble_context(t, child, "h")


class TestBranch:
    def test_branch_from_empty_root(self, engine):
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        child = engine.create_branch(t, root, "c", False, DownstreamPolicy("full"))
        node = engine._handles[t].tree.nodes[child]
        assert node.window.segments == []
        assert node.branch_point_index == 0

    def test_clean_window_branch_records_branch_point(self, engine):
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        for i in range(5):
            engine.record_exchange(t, root, f"h{i}", f"r{i}")
        child = engine.create_branch(t, root, "c", False, DownstreamPolicy("none"))
        node = engine._handles[t].tree.nodes[child]
        assert node.window.segments == []
        assert node.branch_point_index == 5

    def test_unknown_parent_rejected(self, engine):
        t = engine.create_tree("x")
        with pytest.raises(NotFoundError):
            engine.create_branch(t, "nope", "c", False, DownstreamPolicy("none"))

    def test_inactive_parent_rejected(self, engine):
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        child = engine.create_branch(t, root, "c", False, DownstreamPolicy("none"))
        engine.delete_node(t, child, "archive")
        with pytest.raises(NotFoundError):
            engine.create_branch(t, child, "gc", False, DownstreamPolicy("none"))


class TestFigTree:
    def test_topology_counts(self, fig_tree):
        engine, t, nodes = fig_tree
        topo = engine.topology(t)
        assert len(topo["nodes"]) == 6
        assert len(topo["edges"]) == 5
        volatile = {n["id"] for n in topo["nodes"] if n["volatile"]}
        assert volatile == {nodes["A2"], nodes["B1"]}
        downstream = [f for f in topo["flows"] if f["kind"] == "downstream"]
        assert len(downstream) == 5

    def test_merge_records_upstream_flow(self, fig_tree):
        engine, t, nodes = fig_tree
        engine.delete_node(
            t, nodes["B1"], "merge", MergeSpec(Selection("all"), "end")
        )
        upstream = [f for f in engine.topology(t)["flows"] if f["kind"] == "upstream"]
        assert upstream == [
            {"kind": "upstream", "source": nodes["B1"], "dest": nodes["B"]}
        ]

    def test_tree_shape_invariant(self, fig_tree):
        engine, t, _ = fig_tree
        check_tree_shape(engine._handles[t].tree)


class TestDelete:
    def test_purge_empties_node_and_leaves_parent(self, fig_tree):
        engine, t, nodes = fig_tree
        parent_before = engine.transcript(t, nodes["A"])
        engine.delete_node(t, nodes["A2"], "purge")
        tr = engine.transcript(t, nodes["A2"])
        assert tr["status"] == "purged"
        assert tr["segments"] == []
        assert engine.transcript(t, nodes["A"]) == parent_before

    def test_archive_volatile_rejected(self, fig_tree):
        engine, t, nodes = fig_tree
        with pytest.raises(VolatilityError):
            engine.delete_node(t, nodes["A2"], "archive")

    def test_missing_disposition_rejected(self, fig_tree):
        engine, t, nodes = fig_tree
        with pytest.raises(ValidationError):
            engine.delete_node(t, nodes["A2"], None)

    def test_merge_end_append(self, engine):
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        engine.record_exchange(t, root, "p1h", "p1r")
        engine.record_exchange(t, root, "p2h", "p2r")
        child = engine.create_branch(t, root, "c", False, DownstreamPolicy("none"))
        engine.record_exchange(t, child, "c1h", "c1r")
        engine.delete_node(t, child, "merge", MergeSpec(Selection("all"), "end"))
        segs = engine.transcript(t, root)["segments"]
        assert [s["kind"] for s in segs] == ["native", "native", "imported"]
        assert segs[2]["flow"] == "upstream"
        assert segs[2]["source_node"] == child
        assert [m["text"] for m in segs[2]["payload"]] == ["c1h", "c1r"]

    def test_root_deletion_rejected(self, engine):
        t = engine.create_tree("x")
        root = engine.topology(t)["root"]
        with pytest.raises(StructuralError):
            engine.delete_node(t, root, "archive")

    def test_active_children_block_deletion(self, fig_tree):
        engine, t, nodes = fig_tree
        with pytest.raises(StructuralError):
            engine.delete_node(t, nodes["A"], "archive")

    def test_terminal_states_absorb(self, fig_tree):
        engine, t, nodes = fig_tree
        engine.delete_node(t, nodes["A2"], "purge")
        with pytest.raises(LifecycleError):
            engine.delete_node(t, nodes["A2"], "purge")
        with pytest.raises(LifecycleError):
            engine.cross_pass(t, nodes["A1"], nodes["A2"], CrossPolicy(Selection("all")))


def test_branch_point_stability_after_merges(engine):
    # chronological merges insert AT the recorded index; later children's
    # branch points sit above it and parent natives appended after it
    t = engine.create_tree("x")
    root = engine.topology(t)["root"]
    engine.record_exchange(t, root, "p1h", "p1r")
    early = engine.create_branch(t, root, "early", False, DownstreamPolicy("none"))
    engine.record_exchange(t, early, "e1h", "e1r")
    engine.record_exchange(t, root, "p2h", "p2r")
    late = engine.create_branch(t, root, "late", False, DownstreamPolicy("none"))
    engine.record_exchange(t, late, "l1h", "l1r")
    engine.delete_node(t, early, "merge", MergeSpec(Selection("all"), "branch_point"))
    segs = engine.transcript(t, root)["segments"]
    texts = [
        s["unit"]["human"] if s["kind"] == "native" else s["payload"][0]["text"]
        for s in segs
    ]
    assert texts == ["p1h", "e1h", "p2h"]
    # late's recorded branch point still covers only pre-merge content at or
    # below its index
    node = engine._handles[t].tree.nodes[late]
    assert node.branch_point_index == 2
    assert node.branch_point_index <= len(
        engine._handles[t].tree.nodes[root].window.segments
    )
