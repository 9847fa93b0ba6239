"""Build the representative six-node tree and print its topology.

Run: python3 scripts/demo_tree.py [data_dir]
"""

from __future__ import annotations

import json
import sys
import tempfile

from ctree.engine import Engine
from ctree.flow import DownstreamPolicy, MergeSpec, Selection
from ctree.provider import MockProvider


def build(engine: Engine) -> tuple[str, dict[str, str]]:
    t = engine.create_tree("demo")
    nodes = {"root": engine.topology(t)["root"]}
    engine.post_message(t, nodes["root"], "let's plan the project")
    full, clean = DownstreamPolicy("full"), DownstreamPolicy("none")
    nodes["A"] = engine.create_branch(t, nodes["root"], "A", False, full)
    nodes["B"] = engine.create_branch(t, nodes["root"], "B", False, full)
    engine.post_message(t, nodes["A"], "design discussion")
    engine.post_message(t, nodes["B"], "debugging session")
    nodes["A1"] = engine.create_branch(t, nodes["A"], "A1", False, full)
    nodes["A2"] = engine.create_branch(t, nodes["A"], "A2", True, full)
    nodes["B1"] = engine.create_branch(t, nodes["B"], "B1", True, clean)
    engine.post_message(t, nodes["A2"], "a speculative idea")
    engine.post_message(t, nodes["B1"], "a quick tangent")
    return t, nodes


def main() -> None:
    data_dir = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp()
    engine = Engine(data_dir, provider=MockProvider())
    t, nodes = build(engine)
    engine.delete_node(t, nodes["A2"], "merge", MergeSpec(Selection("all"), "end"))
    engine.delete_node(
        t, nodes["B1"], "merge", MergeSpec(Selection("all"), "branch_point")
    )
    print(json.dumps(engine.topology(t), indent=2))
    print(f"\nevent log under: {data_dir}/{t}/events.jsonl", file=sys.stderr)


if __name__ == "__main__":
    main()
