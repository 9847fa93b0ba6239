from __future__ import annotations

import pytest

from ctree.engine import Engine
from ctree.flow import DownstreamPolicy
from ctree.provider import MockProvider


@pytest.fixture
def engine():
    """In-memory engine with the deterministic mock provider."""
    return Engine(data_dir=None, provider=MockProvider())


@pytest.fixture
def disk_engine(tmp_path):
    return Engine(data_dir=tmp_path / "data", provider=MockProvider())


@pytest.fixture
def fig_tree(engine):
    """The representative six-node tree: root -> A, B; A -> A1, A2*; B -> B1*
    (starred nodes volatile). Returns (engine, tree_id, name->node_id map)."""
    t = engine.create_tree("demo", tree_id="demo")
    nodes = {"root": "demo.n0"}
    engine.record_exchange(t, nodes["root"], "hello root", "root reply")
    full = DownstreamPolicy("full")
    nodes["A"] = engine.create_branch(t, nodes["root"], "A", False, full)
    nodes["B"] = engine.create_branch(t, nodes["root"], "B", False, full)
    engine.record_exchange(t, nodes["A"], "about A", "A reply")
    engine.record_exchange(t, nodes["B"], "about B", "B reply")
    nodes["A1"] = engine.create_branch(t, nodes["A"], "A1", False, full)
    nodes["A2"] = engine.create_branch(t, nodes["A"], "A2", True, full)
    nodes["B1"] = engine.create_branch(t, nodes["B"], "B1", True, DownstreamPolicy("none"))
    engine.record_exchange(t, nodes["A2"], "scratch idea", "scratch reply")
    engine.record_exchange(t, nodes["B1"], "tangent", "tangent reply")
    return engine, t, nodes
