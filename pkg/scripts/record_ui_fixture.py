"""Record API responses for the frontend's fixture-driven tests.

Builds the representative tree through the HTTP layer and captures the
topology (pre- and post-merge) plus transcripts as the UI would fetch them.

Run: python3 scripts/record_ui_fixture.py [out_dir]
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from ctree.engine import Engine
from ctree.provider import MockProvider
from ctree.service import create_app


def main() -> None:
    out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "frontend/fixtures")
    out_dir.mkdir(parents=True, exist_ok=True)
    engine = Engine(tempfile.mkdtemp(), provider=MockProvider())
    client = TestClient(create_app(engine))

    tree = client.post("/trees", json={"title": "demo"}).json()["id"]
    root = client.get(f"/trees/{tree}/topology").json()["root"]
    client.post(f"/trees/{tree}/nodes/{root}/messages", json={"human": "plan the project"})

    def branch(parent, purpose, volatile, kind):
        return client.post(
            f"/trees/{tree}/nodes",
            json={
                "parent": parent,
                "purpose": purpose,
                "volatile": volatile,
                "policy": {"kind": kind},
            },
        ).json()["id"]

    a = branch(root, "A", False, "full")
    b = branch(root, "B", False, "full")
    client.post(f"/trees/{tree}/nodes/{a}/messages", json={"human": "design work"})
    client.post(f"/trees/{tree}/nodes/{b}/messages", json={"human": "debug work"})
    a1 = branch(a, "A1", False, "full")
    a2 = branch(a, "A2", True, "full")
    b1 = branch(b, "B1", True, "none")
    client.post(f"/trees/{tree}/nodes/{a2}/messages", json={"human": "wild idea"})
    client.post(f"/trees/{tree}/nodes/{b1}/messages", json={"human": "tangent"})

    fixture = {"tree": tree, "topology": client.get(f"/trees/{tree}/topology").json()}
    (out_dir / "demo_tree.json").write_text(json.dumps(fixture, indent=2))

    client.request(
        "DELETE",
        f"/trees/{tree}/nodes/{a2}",
        json={"disposition": "merge", "spec": {"selection": {"kind": "all"}, "position": "end"}},
    )
    client.request(
        "DELETE",
        f"/trees/{tree}/nodes/{b1}",
        json={
            "disposition": "merge",
            "spec": {"selection": {"kind": "all"}, "position": "branch_point"},
        },
    )
    merged = {
        "tree": tree,
        "topology": client.get(f"/trees/{tree}/topology").json(),
        "parent_transcript": client.get(f"/trees/{tree}/nodes/{b}/transcript").json(),
        "merged_transcript": client.get(f"/trees/{tree}/nodes/{a1}/transcript").json(),
    }
    (out_dir / "demo_tree_after_merge.json").write_text(json.dumps(merged, indent=2))
    print(f"fixtures written to {out_dir}")


if __name__ == "__main__":
    main()
